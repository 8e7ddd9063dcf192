"""Experiment runner CLI: simulate, verify, spectral.

Every run is reproducible from (config file, base seed): trial r uses the
generator seeded by SeedSequence(base_seed, spawn_key=(r,)), so enlarging the
trial count keeps earlier trials' outcomes as a prefix, and reruns with the
same config and seed produce byte-identical output files.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from . import analysis, network, signals
from .config import load_config
from .errors import ConfigInvalid, DistDetectError


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _resolve(cfg, args):
    seed = args.seed if args.seed is not None else cfg.seed
    trials = args.trials if args.trials is not None else cfg.trials
    outdir = args.output_dir if args.output_dir is not None else cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    return seed, trials, outdir


def _sim_worker(payload):
    cfg_model, cfg_process, eta, horizon, seed, trial, digest = payload
    return analysis.simulate_trial(
        cfg_model, cfg_process, eta, horizon, seed, trial, config_digest=digest
    )


def _run_trials(cfg, eta, horizon, seed, trials, workers):
    payloads = [
        (cfg.model, cfg.process, eta, horizon, seed, r, cfg.digest)
        for r in range(trials)
    ]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sim_worker, payloads, chunksize=1))
    return [_sim_worker(p) for p in payloads]


def _scenario_summary(cfg, which=None):
    report = signals.validate_model(cfg.model)
    w_bar = network.expected_matrix(cfg.process)
    s2 = network.sigma2(w_bar)
    k2, rate = signals.second_state(cfg.model)
    eta = analysis.resolve_eta(
        cfg.learning_rate, report.log_bound, cfg.model.n, s2, which
    )
    return report, w_bar, s2, k2, rate, eta


def cmd_simulate(cfg, args) -> int:
    seed, trials, outdir = _resolve(cfg, args)
    report, _, s2, k2, rate, eta = _scenario_summary(cfg)
    trajectories = _run_trials(cfg, eta, cfg.horizon, seed, trials, args.workers)

    csv_path = os.path.join(outdir, "trajectories.csv")
    with open(csv_path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow([
            "trial", "t", "agent", "tv_error", "log_tv_error",
            "kl_increment", "centralized_tv_error",
        ])
        with np.errstate(divide="ignore"):
            for r, traj in enumerate(trajectories):
                log_tv = np.log(traj.tv_error)
                for t in range(traj.horizon):
                    for i in range(cfg.model.n):
                        wr.writerow([
                            r, t + 1, i,
                            _fmt(traj.tv_error[t, i]),
                            _fmt(log_tv[t, i]),
                            _fmt(traj.kl_increment[t, i]),
                            _fmt(traj.centralized_tv[t]),
                        ])

    final_tv = np.stack([traj.tv_error[-1] for traj in trajectories])
    costs = np.stack([traj.kl_increment.sum(axis=0) for traj in trajectories])
    summary = {
        "config_digest": cfg.digest,
        "n": cfg.model.n,
        "m": cfg.model.m,
        "true_state": cfg.model.states.true_index,
        "log_bound_B": report.log_bound,
        "second_state": k2,
        "pairwise_rate_I": rate,
        "sigma2": s2,
        "spectral_gap": 1.0 - s2,
        "eta": eta,
        "horizon": cfg.horizon,
        "trials": trials,
        "seed": seed,
        "final_tv_mean_per_agent": final_tv.mean(axis=0).tolist(),
        "final_tv_max": float(final_tv.max()),
        "total_cost_mean_per_agent": costs.mean(axis=0).tolist(),
        "total_cost_max": float(costs.max()),
        "max_potential_gap": float(
            max(traj.potential_gap.max() for traj in trajectories)
        ),
    }
    with open(os.path.join(outdir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {csv_path} and summary.json (final TV max {summary['final_tv_max']:.3e})")
    return 0


def _verify_worker(payload):
    sc, which, eta, seed, trial = payload
    fn = (analysis.theorem1_trial_statistic if which == "theorem1"
          else analysis.prop1_trial_statistic)
    return fn(sc, eta, seed, trial)


def cmd_verify(cfg, args) -> int:
    seed, trials, outdir = _resolve(cfg, args)
    which = args.which
    if which == "prop1" and not cfg.checkpoints:
        raise ConfigInvalid("prop1 verification needs at least one checkpoint")
    checkpoint = cfg.checkpoints[0] if cfg.checkpoints else cfg.horizon
    sc = analysis.VerificationScenario(
        model=cfg.model, process=cfg.process, delta=cfg.delta,
        horizon=cfg.horizon, checkpoint=checkpoint, eta_mode=cfg.learning_rate,
    )
    B, I, s2 = analysis._scenario_quantities(sc)
    eta = analysis.resolve_eta(sc.eta_mode, B, cfg.model.n, s2, which)
    payloads = [(sc, which, eta, seed, r) for r in range(trials)]
    if args.workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            stats = list(pool.map(_verify_worker, payloads, chunksize=1))
    else:
        stats = [_verify_worker(p) for p in payloads]

    rep = analysis.monte_carlo_verify(sc, which, trials, seed, statistics=stats)
    doc = {
        "config_digest": cfg.digest,
        "which": rep.which,
        "trials": rep.trials,
        "violations": rep.violations,
        "violation_rate": rep.violation_rate,
        "delta": rep.delta,
        "slack": rep.slack,
        "verdict": rep.verdict,
        "bound": asdict(rep.bound),
        "trial_stats": rep.trial_stats,
        "seed": seed,
        "checkpoint": checkpoint if which == "prop1" else None,
        "horizon": cfg.horizon if which == "theorem1" else None,
    }
    path = os.path.join(outdir, f"verify_{which}.json")
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"{which}: {rep.violations}/{rep.trials} violations "
          f"(rate {rep.violation_rate:.4f}, threshold {rep.delta + rep.slack:.4f}) "
          f"-> {rep.verdict}")
    return 0 if rep.verdict == "pass" else 1


def cmd_spectral(cfg, args) -> int:
    seed, _, outdir = _resolve(cfg, args)
    w_bar = network.expected_matrix(cfg.process)
    s2 = network.sigma2(w_bar)
    t_values = [int(t) for t in args.t_values] if args.t_values else list(cfg.checkpoints)
    doc = {
        "config_digest": cfg.digest,
        "expected_matrix": w_bar.tolist(),
        "sigma2": s2,
        "spectral_gap": 1.0 - s2,
        "connected_in_expectation": network.check_expected_connectivity(cfg.process),
        "mixing_deviation": [
            {
                "t": t,
                "per_agent": [
                    network.mixing_deviation_sum(w_bar, i, t)
                    for i in range(cfg.process.n)
                ],
            }
            for t in t_values
        ],
    }
    path = os.path.join(outdir, "spectral.json")
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"sigma2 = {s2:.12f}, spectral gap = {1.0 - s2:.12f}, "
          f"connected = {doc['connected_in_expectation']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="distdetect",
        description="Finite-time distributed detection experiments",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("simulate", cmd_simulate), ("verify", cmd_verify),
                     ("spectral", cmd_spectral)):
        sp = sub.add_parser(name)
        sp.add_argument("config", help="path to a YAML scenario config")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--output-dir", default=None)
        sp.add_argument("--workers", type=int,
                        default=max(1, min(os.cpu_count() or 1, 8)))
        sp.set_defaults(fn=fn)
    sub.choices["verify"].add_argument(
        "--which", choices=["theorem1", "prop1"], required=True
    )
    sub.choices["spectral"].add_argument("--t-values", nargs="*", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.fn(cfg, args)
    except ConfigInvalid as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2
    except DistDetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
