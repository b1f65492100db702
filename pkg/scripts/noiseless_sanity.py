"""Noiseless BIHT-l2 with many measurements (M=2000) on the 400x100 group images.

    python3 scripts/noiseless_sanity.py --trials 10
"""
import argparse

from bfcs import harness as H
from bfcs.model import GroupSignalSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/noiseless")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--M", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    cfg = H.ExperimentConfig(
        signal=GroupSignalSpec(seed=None), M=args.M, noise_variance=0.0,
        algorithms=[H.AlgorithmSpec("BIHT", "l2", solver={"K": 90})],
        n_trials=args.trials, master_seed=args.seed, output_dir=args.out)
    res = H.run_experiment(cfg)
    for r in res.results:
        print(f"trial {r.trial}: SNR {r.snr_db:6.2f} dB, F1 {r.support_f1:.3f}, {r.iterations} iterations")
    row = res.by_algorithm()["BIHT-l2"]
    print(f"mean SNR {row['snr_db_mean']:.2f} dB (std {row['snr_db_std']:.2f})")


if __name__ == "__main__":
    main()
