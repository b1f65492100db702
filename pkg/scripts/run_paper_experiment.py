"""Reference experiment: six algorithms on 400x100 images, M=200, noise variance 0.01.

Prints the summary table and whether the expected qualitative ordering holds
(fused >= BIHT per barrier, l2 >= l1 per variant, FBCS-MTV-l2 on top, with a
0.1 dB indifference margin).

    python3 scripts/run_paper_experiment.py --out runs/paper --trials 10
"""
import argparse

from bfcs import harness as H

MARGIN_DB = 0.1


def ordering_checks(snr):
    checks = []
    for b in ("l1", "l2"):
        for v in ("FBCS_TV", "FBCS_MTV"):
            checks.append((f"{v}-{b} >= BIHT-{b}", snr[f"{v}-{b}"] >= snr[f"BIHT-{b}"] - MARGIN_DB))
    for v in ("BIHT", "FBCS_TV", "FBCS_MTV"):
        checks.append((f"{v}-l2 >= {v}-l1", snr[f"{v}-l2"] >= snr[f"{v}-l1"] - MARGIN_DB))
    rest = max(s for k, s in snr.items() if k != "FBCS_MTV-l2")
    checks.append(("FBCS_MTV-l2 highest", snr["FBCS_MTV-l2"] >= rest - MARGIN_DB))
    return checks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/paper")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = H.paper_config(output_dir=args.out, n_trials=args.trials, master_seed=args.seed,
                         workers=args.workers)
    result = H.run_experiment(cfg)
    snr = {}
    for row in result.summary:
        snr[row["algorithm"]] = row["snr_db_mean"]
        print(f"{row['algorithm']:<13} best eps {str(row['best_epsilon']):<10} "
              f"SNR {row['snr_db_mean']:7.3f} +- {row['snr_db_std']:.3f}  "
              f"F1 {row['support_f1_mean']:.3f}  ({row['completed']}/{row['trials']})")
    print()
    for name, ok in ordering_checks(snr):
        print(f"{'ok ' if ok else 'NO '} {name}")
    print(f"\noutputs in {result.output_dir}")


if __name__ == "__main__":
    main()
