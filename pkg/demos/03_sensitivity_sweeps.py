"""Sensitivity of answer quality to the weighting temperature and depth.

Trains on multi-hop pairs whose answers are split across two gold chunks
and evaluates on held-out pairs, then sweeps the softmax inverse
temperature beta and the retrieval depth top_k one at a time. Both
curves peak in the interior: beta=0 lets an antagonist chunk cancel the
true evidence, very large beta collapses onto an answer-free echo chunk,
k=1 retrieves only the echo, and large k floods the aggregate with
distractors.

This is a scaled-down run (2 seeds, short training) so it finishes in
about a minute; the acceptance suite runs the full 5-seed version.
Writes sweep_beta.csv/.svg and sweep_k.csv/.svg into demos/out/. Run:
python3 demos/03_sensitivity_sweeps.py
"""
from pathlib import Path

import numpy as np

from alignrag.data import SyntheticSpec, generate_synthetic, evidence_texts
from alignrag.evaluation import sweep_alignment_weight, sweep_to_csv, sweep_to_svg, sweep_top_k
from alignrag.training import TrainConfig, train
from alignrag.vocab import Vocabulary

BETA_GRID = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
K_GRID = [1, 2, 3, 5, 8, 12, 20]
SEEDS = (0, 1)


def main() -> None:
    spec = SyntheticSpec(
        seed=7, n_samples=48, n_gold_evidence=2, n_distractors=40, distractor_similarity=0.7
    )
    samples, _ = generate_synthetic(spec)
    texts = []
    for s in samples:
        texts += [s.question, s.answer] + [t for _, t in evidence_texts(s)]
    vocab = Vocabulary.from_texts(texts, hash_buckets=64)
    train_set, eval_set = samples[:32], samples[32:]
    print(f"== {len(train_set)} training samples, {len(eval_set)} held-out samples ==")

    beta_ems = np.zeros((len(SEEDS), len(BETA_GRID)))
    k_ems = np.zeros((len(SEEDS), len(K_GRID)))
    last_sweeps = None
    for row, seed in enumerate(SEEDS):
        config = TrainConfig(
            seed=seed,
            dim=64,
            hidden=32,
            learning_rate=0.02,
            epochs=300,
            batch_size=4,
            lambda_=1.0,
            beta=2.0,
            top_k=5,
            freeze_encoder=True,
            include_title=False,
        )
        print(f"  training seed {seed} ({config.epochs} epochs)...")
        ckpt = train(train_set, config, vocab=vocab)
        bs = sweep_alignment_weight(eval_set, ckpt, BETA_GRID)
        ks = sweep_top_k(eval_set, ckpt, K_GRID)
        beta_ems[row] = [r.metrics.em for r in bs.reports]
        k_ems[row] = [r.metrics.em for r in ks.reports]
        last_sweeps = (bs, ks)

    print("\n== Held-out EM vs beta (mean over seeds) ==")
    for b, em in zip(BETA_GRID, beta_ems.mean(axis=0)):
        bar = "#" * int(em / 4)
        print(f"  beta={b:>4g}  EM={em:5.1f}  {bar}")
    print("\n== Held-out EM vs top_k (mean over seeds) ==")
    for k, em in zip(K_GRID, k_ems.mean(axis=0)):
        bar = "#" * int(em / 4)
        print(f"  k={k:>3d}     EM={em:5.1f}  {bar}")

    out = Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)
    bs, ks = last_sweeps
    (out / "sweep_beta.csv").write_text(sweep_to_csv(bs))
    (out / "sweep_beta.svg").write_text(sweep_to_svg(bs))
    (out / "sweep_k.csv").write_text(sweep_to_csv(ks))
    (out / "sweep_k.svg").write_text(sweep_to_svg(ks))
    print(f"\nWrote last seed's sweep artifacts to {out}/")


if __name__ == "__main__":
    main()
