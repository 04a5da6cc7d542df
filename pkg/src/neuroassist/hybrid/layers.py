"""Transformer encoder pieces with hand-written backward passes.

Token sequences are (seq, d_model) arrays; every ``*_forward`` returns
``(output, cache)`` and the matching ``*_backward`` consumes that cache.
"""
import numpy as np

from ..exceptions import ArgumentError

LN_EPS = 1e-5


def softmax_rows(scores):
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def attention(Q, K, V, d_k=None):
    """Scaled dot-product attention ``softmax(Q K^T / sqrt(d_k)) V``."""
    Q, K, V = (np.atleast_2d(np.asarray(a, dtype=np.float64)) for a in (Q, K, V))
    if Q.shape[1] != K.shape[1]:
        raise ArgumentError(f"Q and K column counts differ: {Q.shape} vs {K.shape}")
    if K.shape[0] != V.shape[0]:
        raise ArgumentError(f"K and V row counts differ: {K.shape} vs {V.shape}")
    d_k = Q.shape[1] if d_k is None else d_k
    weights = softmax_rows(Q @ K.T / np.sqrt(d_k))
    return weights @ V


def _split_heads(M, n_heads):
    seq, d = M.shape
    return M.reshape(seq, n_heads, d // n_heads).transpose(1, 0, 2)


def _merge_heads(M):
    h, seq, dk = M.shape
    return M.transpose(1, 0, 2).reshape(seq, h * dk)


def mha_forward(X, Wq, Wk, Wv, Wo, n_heads):
    """Multi-head self-attention over the rows of ``X``."""
    d = X.shape[1]
    if d % n_heads:
        raise ArgumentError(f"d_model {d} not divisible by n_heads {n_heads}")
    dk = d // n_heads
    Q, K, V = _split_heads(X @ Wq, n_heads), _split_heads(X @ Wk, n_heads), \
        _split_heads(X @ Wv, n_heads)
    A = softmax_rows(Q @ K.transpose(0, 2, 1) / np.sqrt(dk))
    O = _merge_heads(A @ V)
    return O @ Wo, (X, Q, K, V, A, O, Wq, Wk, Wv, Wo)


def mha_backward(dout, cache):
    X, Q, K, V, A, O, Wq, Wk, Wv, Wo = cache
    n_heads, _, dk = Q.shape
    dWo = O.T @ dout
    dO = _split_heads(dout @ Wo.T, n_heads)
    dA = dO @ V.transpose(0, 2, 1)
    dV = A.transpose(0, 2, 1) @ dO
    dS = A * (dA - np.sum(dA * A, axis=-1, keepdims=True)) / np.sqrt(dk)
    dQ = dS @ K
    dK = dS.transpose(0, 2, 1) @ Q
    dQ, dK, dV = _merge_heads(dQ), _merge_heads(dK), _merge_heads(dV)
    dX = dQ @ Wq.T + dK @ Wk.T + dV @ Wv.T
    return dX, {"Wq": X.T @ dQ, "Wk": X.T @ dK, "Wv": X.T @ dV, "Wo": dWo}


def layer_norm(x, gamma, beta, eps=LN_EPS):
    """``gamma * (x - mean) / sqrt(var + eps) + beta`` over the last axis.

    ``var`` is the population variance.
    """
    return layer_norm_forward(x, gamma, beta, eps)[0]


def layer_norm_forward(x, gamma, beta, eps=LN_EPS):
    x = np.asarray(x, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if gamma.shape[-1] != x.shape[-1] or beta.shape[-1] != x.shape[-1]:
        raise ArgumentError("layer_norm gain/bias length differs from input")
    mu = x.mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(x.var(axis=-1, keepdims=True) + eps)
    xhat = (x - mu) * inv
    return gamma * xhat + beta, (xhat, inv, gamma)


def layer_norm_backward(dy, cache):
    xhat, inv, gamma = cache
    dxhat = dy * gamma
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * np.mean(dxhat * xhat, axis=-1, keepdims=True))
    axes = tuple(range(dy.ndim - 1))
    return dx, np.sum(dy * xhat, axis=axes), np.sum(dy, axis=axes)


def ffn(x, W1, b1, W2, b2):
    """Position-wise ``max(0, x W1 + b1) W2 + b2``."""
    return ffn_forward(x, W1, b1, W2, b2)[0]


def ffn_forward(x, W1, b1, W2, b2):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != W1.shape[0] or W1.shape[1] != W2.shape[0] \
            or b1.shape[-1] != W1.shape[1] or b2.shape[-1] != W2.shape[1]:
        raise ArgumentError("ffn weight shapes do not chain")
    pre = x @ W1 + b1
    hidden = np.maximum(pre, 0.0)
    return hidden @ W2 + b2, (x, pre, hidden, W1, W2)


def ffn_backward(dy, cache):
    x, pre, hidden, W1, W2 = cache
    dhidden = (dy @ W2.T) * (pre > 0)
    dx = dhidden @ W1.T
    return dx, {"W1": x.T @ dhidden, "b1": dhidden.sum(axis=0),
                "W2": hidden.T @ dy, "b2": dy.sum(axis=0)}
