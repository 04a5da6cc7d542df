"""Walk through the motor-imagery pipeline on a synthetic recording.

The script runs the same stages as the ``neuroassist`` subcommands
(synthesize, extract features, train the hybrid Q-network, evaluate),
but from Python, and prints what each stage produced.  With the default
configuration the whole run takes well under a minute.

    python demos/eeg_pipeline.py [OUTDIR]
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from neuroassist import pipeline
from neuroassist.config import build_config

def main(out):
    cfg = build_config(overrides={"out": str(out), "seed": 0})

    synth = pipeline.run_synth(cfg, str(out))
    print(f"synthetic recording: {synth['n_trials']} trials x {synth['n_channels']} "
          f"channels at {synth['fs_hz']:g} Hz")

    feats = pipeline.run_features(cfg, str(out))
    print(f"features: {feats['n_features']} columns per trial "
          f"({feats['n_train']} train / {feats['n_test']} test)")

    # The per-class CSP eigenvalues show how separable each class is from
    # the rest: the leading value is the largest share of band power that
    # one spatial filter can attribute to that class.
    model = pipeline.load_feature_model(Path(out) / pipeline.FEATURE_MODEL)
    for csp in model["csp_models"]:
        print(f"  class {csp.class_index}: leading CSP eigenvalue "
              f"{csp.eigenvalues[0]:.3f}")

    train = pipeline.run_train(cfg, str(out))
    print(f"trained {train['steps']} DQN steps, train accuracy "
          f"{train['train_metrics']['accuracy']:.1f}%")

    metrics = pipeline.run_eval(cfg, str(out))
    print(f"held-out accuracy {metrics['accuracy']:.1f}%, "
          f"macro F1 {metrics['f1']:.1f}")
    print("confusion (rows = true class):")
    print(np.array(metrics["confusion"]))


if __name__ == "__main__":
    if len(sys.argv) > 1:
        main(Path(sys.argv[1]))
    else:
        with tempfile.TemporaryDirectory() as tmp:
            main(Path(tmp))
