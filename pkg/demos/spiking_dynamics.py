"""Leaky integrate-and-fire dynamics and the STDP learning window.

Drives a single LIF neuron with a few constant currents, compares the
simulated first-spike time with the closed-form charging time, and
prints the exponential STDP window at a handful of spike-time offsets.

    python demos/spiking_dynamics.py
"""
import math

from neuroassist.hybrid import LifParams, LifState, StdpParams, lif_step, stdp_delta


def first_spike(params, current, t_max_ms=500.0):
    state = LifState.resting(1, params)
    while state.t_ms < t_max_ms:
        state, spiked = lif_step(params, state, [current])
        if spiked[0]:
            return state.t_ms
    return None


def main():
    p = LifParams(tau_ms=20.0, R=1.0, v_thresh=1.0, v_reset=0.0, dt_ms=0.1)
    print("current  simulated  closed form (ms)")
    for current in (0.9, 1.2, 1.5, 3.0):
        sim = first_spike(p, current)
        exact = -p.tau_ms * math.log(1 - p.v_thresh / (p.R * current)) \
            if p.R * current > p.v_thresh else None
        fmt = lambda x: "  never" if x is None else f"{x:7.2f}"
        print(f"{current:7.2f}  {fmt(sim)}    {fmt(exact)}")

    w = StdpParams(a_plus=0.1, a_minus=0.12, tau_plus_ms=20.0, tau_minus_ms=20.0)
    print("\ndt = t_post - t_pre (ms)   weight change")
    for dt in (-40, -20, -5, 5, 20, 40):
        print(f"{dt:24d}   {stdp_delta(dt, w):+.5f}")


if __name__ == "__main__":
    main()
