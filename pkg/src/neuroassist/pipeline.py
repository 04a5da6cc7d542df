"""End-to-end pipeline steps driven by a validated run configuration.

Each function reads its inputs from disk, writes its outputs into ``out``
and returns a small summary ``dict``.  Every file written carries the
configuration hash and seed, and every output is a deterministic function
of ``(config, seed)``.
"""
import json
import os

import numpy as np

from . import _rng, signals
from .config import effective, provenance, provenance_comment
from .exceptions import ArgumentError
from .features import (CspModel, NormalizationParams, WelchConfig,
                       assemble_features, csp_fit_ovr, normalize,
                       read_feature_csv, write_feature_csv)
from .hybrid import (HybridConfig, LifParams, StdpParams, init_network,
                     load_checkpoint, save_checkpoint)
from .rl import (SWEEP_STRUCTURES, ClassificationEnv, RewardStructure,
                 TrainSchedule, evaluate, train_dqn)
from .robust import (RnacConfig, UncertaintySet,
                     bundled_fixture_path, load_fixture, rnac,
                     robust_value_iteration, tabular_features)

MANIFEST = "recording.json"
GROUND_TRUTH = "ground_truth.json"
FEATURES_TRAIN = "features_train.csv"
FEATURES_TEST = "features_test.csv"
FEATURE_MODEL = "feature_model.json"
CHECKPOINT = "checkpoint.json"
HISTORY = "history.csv"
METRICS = "metrics.json"
SWEEP = "reward_sweep.csv"
RNAC_DIAGNOSTICS = "rnac_diagnostics.csv"

SWEEP_COLUMNS = ("structure", "accuracy", "f1", "precision", "recall",
                 "reward_based_accuracy")


def write_json(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _paths(cfg, out):
    data = cfg["data"]
    feat_dir = data["features_dir"] or out
    return {"manifest": data["manifest"] or os.path.join(out, MANIFEST),
            "features_dir": feat_dir,
            "checkpoint": data["checkpoint"] or os.path.join(out, CHECKPOINT)}


def stratified_split(labels, train_frac, seed):
    """Seeded per-class split; returns sorted ``(train_idx, test_idx)``.

    Each class contributes ``round(train_frac * n_c)`` rows to training,
    and at least one row to each side.
    """
    labels = np.asarray(labels, dtype=int)
    rng = _rng.stream(seed, "split")
    train, test = [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        if len(idx) < 2:
            raise ArgumentError(f"class {c} has {len(idx)} trial(s); need 2 to split")
        n = min(max(int(round(train_frac * len(idx))), 1), len(idx) - 1)
        train.extend(idx[:n])
        test.extend(idx[n:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------

def run_synth(cfg, out):
    s = cfg["synth"]
    spec = signals.default_synthetic_spec(
        s["n_channels"], s["n_classes"], s["trials_per_class"], s["fs_hz"],
        s["trial_len_s"], s["gain"], s["noise_scale"], cfg["seed"])
    spec.onset_s = s["onset_s"]
    rec, gt = signals.generate_synthetic(spec)
    os.makedirs(out, exist_ok=True)
    manifest = os.path.join(out, MANIFEST)
    signals.write_recording(rec, manifest, extra={"provenance": provenance(cfg)},
                            comment=provenance_comment(cfg))
    doc = gt.to_json()
    doc["provenance"] = provenance(cfg)
    write_json(doc, os.path.join(out, GROUND_TRUTH))
    return {"manifest": manifest, "n_trials": len(rec.trials),
            "n_channels": rec.n_channels, "n_classes": rec.n_classes,
            "fs_hz": rec.sampling_rate_hz,
            "n_samples": rec.trials[0].n_times}


# --------------------------------------------------------------------------
# features
# --------------------------------------------------------------------------

def run_features(cfg, out, jobs=1):
    cfg = effective(cfg)
    paths = _paths(cfg, out)
    rec = signals.load_recording(paths["manifest"])
    ep = cfg["epoch"]
    rec = signals.epoch_trials(rec, ep["t_min_s"], ep["t_max_s"])
    band = signals.FrequencyBand("analysis", cfg["filter"]["lo_hz"], cfg["filter"]["hi_hz"])
    rec = signals.bandpass_filter(rec, band)
    tr_idx, te_idx = stratified_split(rec.labels, cfg["split"]["train_frac"], cfg["seed"])
    train, test = rec.subset(tr_idx), rec.subset(te_idx)
    models = csp_fit_ovr(train, cfg["csp"]["n_components"], cfg["csp"]["eps_scale"])
    w = cfg["welch"]
    welch = WelchConfig(w["segment_len"], w["overlap_frac"], w["nfft"], w["averaging"])
    f_train = assemble_features(train, models, welch, jobs=jobs)
    f_test = assemble_features(test, models, welch, jobs=jobs)
    for method in cfg["normalization"]:
        f_train = normalize(f_train, method, "fit")
    if cfg["normalization"]:
        f_test = normalize(f_test, mode="apply", state=f_train.norm_state)

    os.makedirs(out, exist_ok=True)
    comment = provenance_comment(cfg)
    write_feature_csv(f_train, os.path.join(out, FEATURES_TRAIN), comment)
    write_feature_csv(f_test, os.path.join(out, FEATURES_TEST), comment)
    n_samples = rec.trials[0].n_times
    seg, nfft, _ = welch.resolve(n_samples, rec.sampling_rate_hz)
    meta = {"provenance": provenance(cfg),
            "subject": cfg["subject"],
            "epoch": {"t_min_s": ep["t_min_s"], "t_max_s": ep["t_max_s"],
                      "n_samples": n_samples},
            "filter_band_hz": [band.lo_hz, band.hi_hz],
            "n_classes": rec.n_classes,
            "n_csp_components": cfg["csp"]["n_components"],
            "n_spatial_filters": len(models) * cfg["csp"]["n_components"],
            "welch": {"segment_len": seg, "nfft": nfft,
                      "overlap_frac": w["overlap_frac"], "averaging": w["averaging"]},
            "n_features": f_train.n_features,
            "train_indices": tr_idx.tolist(), "test_indices": te_idx.tolist(),
            "csp_models": [m.to_json() for m in models],
            "normalization": [p.to_json() for p in f_train.norm_state]}
    write_json(meta, os.path.join(out, FEATURE_MODEL))
    return {"n_features": f_train.n_features, "n_train": len(tr_idx),
            "n_test": len(te_idx), "n_spatial_filters": meta["n_spatial_filters"],
            "degenerate_models": [m.class_index for m in models if m.degenerate]}


def load_feature_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    doc["csp_models"] = [CspModel.from_json(m) for m in doc["csp_models"]]
    doc["normalization"] = [NormalizationParams.from_json(p) for p in doc["normalization"]]
    return doc


# --------------------------------------------------------------------------
# train / eval / sweep
# --------------------------------------------------------------------------

def hybrid_config(cfg, n_features, n_actions):
    n = cfg["net"]
    return HybridConfig(
        n_features, n_actions, n["tokens_per_trial"], n["d_model"], n["n_heads"],
        n["n_layers"], n["d_ff"], n["hidden"], n["n_neurons"], None,
        LifParams(**n["lif"]), StdpParams(**n["stdp"]), n["pre_spike_threshold"])


def train_schedule(cfg):
    s = cfg["schedule"]
    return TrainSchedule(tuple(s["phase_steps"]), s["epsilon_start"], s["epsilon_end"],
                         s["gamma"], s["learning_rate"], s["lr_decay"],
                         s["optimizer"], cfg["seed"])


def reward_structure(cfg):
    return RewardStructure(cfg["reward"]["r_correct"], cfg["reward"]["r_incorrect"])


def _n_classes(feat_dir, fm):
    path = os.path.join(feat_dir, FEATURE_MODEL)
    if os.path.exists(path):
        with open(path) as fh:
            return int(json.load(fh)["n_classes"])
    return int(fm.labels.max()) + 1


def fit_network(cfg, fm, n_classes, reward):
    net = init_network(hybrid_config(cfg, fm.n_features, n_classes), cfg["seed"])
    env = ClassificationEnv(fm.values, fm.labels, reward, n_classes)
    return train_dqn(net, env, train_schedule(cfg))


def run_train(cfg, out):
    paths = _paths(cfg, out)
    fm = read_feature_csv(os.path.join(paths["features_dir"], FEATURES_TRAIN))
    k = _n_classes(paths["features_dir"], fm)
    reward = reward_structure(cfg)
    net, hist = fit_network(cfg, fm, k, reward)
    os.makedirs(out, exist_ok=True)
    save_checkpoint(net, os.path.join(out, CHECKPOINT), {"provenance": provenance(cfg)})
    hist.write_csv(os.path.join(out, HISTORY), provenance_comment(cfg))
    m = evaluate(net, fm, reward, n_classes=k)
    return {"steps": len(hist), "train_metrics": m.as_row()}


def run_eval(cfg, out):
    paths = _paths(cfg, out)
    net = load_checkpoint(paths["checkpoint"])
    fm = read_feature_csv(os.path.join(paths["features_dir"], FEATURES_TEST))
    if net.config.n_features != fm.n_features:
        raise ArgumentError(f"checkpoint expects {net.config.n_features} features, "
                            f"test matrix has {fm.n_features}")
    if fm.labels.max() >= net.config.n_actions:
        raise ArgumentError(f"label {fm.labels.max()} outside the checkpoint's "
                            f"{net.config.n_actions} actions")
    reward = reward_structure(cfg)
    m = evaluate(net, fm, reward, cfg["eval"]["k_folds"], cfg["seed"],
                 net.config.n_actions)
    doc = m.to_json()
    doc["reward_structure"] = [reward.r_correct, reward.r_incorrect]
    doc["n_test"] = len(fm.labels)
    doc["provenance"] = provenance(cfg)
    os.makedirs(out, exist_ok=True)
    write_json(doc, os.path.join(out, METRICS))
    return doc


def run_sweep_rewards(cfg, out, structures=SWEEP_STRUCTURES):
    paths = _paths(cfg, out)
    f_train = read_feature_csv(os.path.join(paths["features_dir"], FEATURES_TRAIN))
    f_test = read_feature_csv(os.path.join(paths["features_dir"], FEATURES_TEST))
    k = _n_classes(paths["features_dir"], f_train)
    rows = []
    for r_pos, r_neg in structures:
        reward = RewardStructure(r_pos, r_neg)
        net, _ = fit_network(cfg, f_train, k, reward)
        m = evaluate(net, f_test, reward, n_classes=k)
        row = {"structure": reward.label, **m.as_row(),
               "confusion": m.confusion.tolist()}
        rows.append(row)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, SWEEP), "w") as fh:
        fh.write(f"# {provenance_comment(cfg)}\n")
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join([row["structure"]] +
                              [repr(float(row[c])) for c in SWEEP_COLUMNS[1:]]) + "\n")
    return rows


def read_sweep_csv(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        vals = ln.split(",")
        out.append({h: (v if h == "structure" else float(v)) for h, v in zip(header, vals)})
    return out


# --------------------------------------------------------------------------
# rnac-demo
# --------------------------------------------------------------------------

def rnac_config(cfg):
    r = cfg["rnac"]
    return RnacConfig(T=r["T"], K=r["K"], N=r["N"], eta_schedule=r["eta_schedule"],
                      eta0=r["eta0"], n_probes=r["n_probes"])


def run_rnac_demo(cfg, out):
    r = cfg["rnac"]
    mdp = load_fixture(r["fixture"] or bundled_fixture_path())
    uset = UncertaintySet(r["variant"], r["delta"])
    feats = tabular_features(mdp)
    pi, diag = rnac(mdp, uset, feats, rnac_config(cfg), cfg["seed"])
    optimum = float(mdp.rho @ robust_value_iteration(mdp, uset))
    final = diag.robust_value[-1]
    os.makedirs(out, exist_ok=True)
    diag.write_csv(os.path.join(out, RNAC_DIAGNOSTICS), provenance_comment(cfg))
    return {"optimum": optimum, "final_value": final, "gap": optimum - final,
            "policy": pi.tolist(), "uncertainty_set": f"{uset.variant}({uset.delta:g})"}


__all__ = ["stratified_split", "run_synth", "run_features", "run_train", "run_eval",
           "run_sweep_rewards", "run_rnac_demo", "read_sweep_csv", "hybrid_config",
           "train_schedule", "reward_structure", "fit_network", "load_feature_model",
           "rnac_config"]
