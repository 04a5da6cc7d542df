"""Independent reference implementations used as test oracles.

Everything here is written with plain Python loops, ``math``/``cmath`` and
``statistics`` so that it shares no code path with the package under test.
"""
import cmath
import math
import statistics


def dft_power(segment, nfft):
    """|X_k|^2 for k = 0..nfft//2 by the defining sum (zero padded)."""
    out = []
    for k in range(nfft // 2 + 1):
        acc = 0j
        for n, v in enumerate(segment):
            acc += v * cmath.exp(-2j * math.pi * k * n / nfft)
        out.append(abs(acc) ** 2)
    return out


def periodogram_segments(x, fs, seg_len, overlap, nfft):
    """Density-scaled one-sided periodograms of periodic-Hann windowed segments."""
    win = [math.sin(math.pi * n / seg_len) ** 2 for n in range(seg_len)]
    wss = sum(w * w for w in win)
    step = seg_len - int(math.floor(overlap * seg_len))
    segs = []
    start = 0
    while start + seg_len <= len(x):
        seg = [x[start + n] * win[n] for n in range(seg_len)]
        p = [v / (fs * wss) for v in dft_power(seg, nfft)]
        last = nfft // 2
        for k in range(1, last + 1):
            if k == last and nfft % 2 == 0:
                continue
            p[k] *= 2.0
        segs.append(p)
        start += step
    return segs


def welch_median(x, fs, seg_len, overlap, nfft):
    segs = periodogram_segments(list(map(float, x)), fs, seg_len, overlap, nfft)
    return [statistics.median(col) for col in zip(*segs)]


def excess_kurtosis(x):
    n = len(x)
    m = sum(x) / n
    s = math.sqrt(sum((v - m) ** 2 for v in x) / (n - 1))
    s4 = sum(((v - m) / s) ** 4 for v in x)
    return (n * (n + 1) / ((n - 1) * (n - 2) * (n - 3)) * s4
            - 3 * (n - 1) ** 2 / ((n - 2) * (n - 3)))


def skewness(x):
    n = len(x)
    m = sum(x) / n
    s = math.sqrt(sum((v - m) ** 2 for v in x) / (n - 1))
    return n / ((n - 1) * (n - 2)) * sum(((v - m) / s) ** 3 for v in x)


def rms(x):
    return math.sqrt(sum(v * v for v in x) / len(x))


def abs_diff(x, y):
    return sum(abs(a - b) for a, b in zip(x, y))


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))]


def softmax(row):
    m = max(row)
    e = [math.exp(v - m) for v in row]
    s = sum(e)
    return [v / s for v in e]


def attention(Q, K, V):
    d = len(Q[0])
    out = []
    for q in Q:
        scores = [sum(a * b for a, b in zip(q, k)) / math.sqrt(d) for k in K]
        w = softmax(scores)
        out.append([sum(w[j] * V[j][c] for j in range(len(V))) for c in range(len(V[0]))])
    return out


def layer_norm(x, gamma, beta, eps=1e-5):
    n = len(x)
    m = sum(x) / n
    var = sum((v - m) ** 2 for v in x) / n
    return [g * (v - m) / math.sqrt(var + eps) + b for v, g, b in zip(x, gamma, beta)]


def sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


def value_iteration(P, R, gamma, tol=1e-13):
    """Classical VI; P[s][a][t], R[s][a]."""
    S, A = len(P), len(P[0])
    V = [0.0] * S
    while True:
        new = [max(R[s][a] + gamma * sum(P[s][a][t] * V[t] for t in range(S))
                   for a in range(A)) for s in range(S)]
        if max(abs(a - b) for a, b in zip(new, V)) < tol:
            return new
        V = new


def solve(A, b):
    """Gaussian elimination with partial pivoting."""
    n = len(A)
    M = [list(map(float, A[i])) + [float(b[i])] for i in range(n)]
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(M[r][c]))
        M[c], M[p] = M[p], M[c]
        for r in range(n):
            if r != c:
                f = M[r][c] / M[c][c]
                for k in range(c, n + 1):
                    M[r][k] -= f * M[c][k]
    return [M[i][n] / M[i][i] for i in range(n)]


def policy_evaluation(P, R, pi, gamma):
    """(I - gamma P_pi)^{-1} r_pi by elimination."""
    S, A = len(P), len(P[0])
    Ppi = [[sum(pi[s][a] * P[s][a][t] for a in range(A)) for t in range(S)] for s in range(S)]
    rpi = [sum(pi[s][a] * R[s][a] for a in range(A)) for s in range(S)]
    M = [[(1.0 if s == t else 0.0) - gamma * Ppi[s][t] for t in range(S)] for s in range(S)]
    return solve(M, rpi)
