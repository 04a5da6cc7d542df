"""EEG motor-imagery decoding: features, hybrid Q-network, robust actor-critic."""
__version__ = "0.1.0"
