"""End-to-end evaluation and sensitivity sweeps.

evaluate() runs encode -> top-k -> threshold -> weight -> aggregate ->
greedy decode -> metrics for every sample and emits a fully attributed,
deterministic report. The two sweeps vary exactly one parameter (the
alignment-weight temperature beta, or retrieval top-k) and rerun
evaluate per grid point.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .aggregation import aggregate, normalize_weights
from .data import QASample, evidence_texts
from .decoder import decode_greedy
from .encoder import encode
from .errors import EmptyScores
from .index import build_index, filter_by_threshold, top_k
from .metrics import MetricReport, bleu, exact_match, rouge_l, score_corpus, token_f1
from .training import Checkpoint, TrainConfig
from .vocab import tokenize

REPORT_SCHEMA_VERSION = 1


@dataclass
class EvalReport:
    metrics: MetricReport
    config: dict
    checkpoint_fingerprint: str
    samples: list[dict]
    n_failures: int
    mean_consistency: float
    mean_support_rate: float

    def as_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "metrics": self.metrics.as_dict(),
            "config": self.config,
            "checkpoint_fingerprint": self.checkpoint_fingerprint,
            "samples": self.samples,
            "n_failures": self.n_failures,
            "mean_consistency": self.mean_consistency,
            "mean_support_rate": self.mean_support_rate,
        }


@dataclass
class SweepResult:
    param_name: str
    grid: list[float]
    reports: list[EvalReport]


def checkpoint_fingerprint(ckpt: Checkpoint) -> str:
    h = hashlib.sha256()
    for name in sorted(ckpt.params):
        h.update(name.encode())
        h.update(np.ascontiguousarray(ckpt.params[name]).tobytes())
    return h.hexdigest()[:16]


def _support_rate(pred_tokens: list[str], retained_texts: list[str]) -> float | None:
    """Fraction of generated content tokens present in retained evidence."""
    content = [t for t in pred_tokens if not t.startswith("<")]
    if not content:
        return None
    evidence_tokens = set()
    for text in retained_texts:
        evidence_tokens.update(tokenize(text))
    return sum(1 for t in content if t in evidence_tokens) / len(content)


def evaluate(
    dataset: list[QASample], ckpt: Checkpoint, config: TrainConfig | None = None
) -> EvalReport:
    """Pure function of (checkpoint, dataset, config); reports are byte-stable."""
    if not dataset:
        raise EmptyScores("evaluation dataset is empty")
    config = config if config is not None else ckpt.config
    vocab, enc, dec = ckpt.vocab, ckpt.encoder, ckpt.decoder
    records = []
    preds: list[str] = []
    golds: list[str] = []
    consistencies: list[float] = []
    support_rates: list[float] = []
    n_failures = 0
    for sample in dataset:
        chunks = evidence_texts(sample, include_title=config.include_title)
        if config.oracle_evidence:
            gold_titles = {t for t, _ in sample.supporting_facts}
            chunks = [(t, text) for t, text in chunks if t in gold_titles]
        index = build_index(list(enumerate(text for _, text in chunks)), vocab, enc)
        q = encode(sample.question, vocab, enc)
        k = len(index) if config.oracle_evidence else config.top_k
        results = filter_by_threshold(top_k(q, index, k), config.tau)
        if not results:
            n_failures += 1
            preds.append("")
            golds.append(sample.answer)
            records.append(
                {
                    "id": sample.id,
                    "retrieval_failure": True,
                    "retrieved": [],
                    "generated": "",
                    "em": 0,
                    "f1": 0.0,
                    "bleu": 0.0,
                    "rouge_l": 0.0,
                    "consistency": None,
                    "support_rate": None,
                }
            )
            continue
        weights = normalize_weights([(r.chunk_id, r.score) for r in results], config.beta)
        agg = aggregate(weights, index)
        trace = decode_greedy(sample.question, agg, vocab, enc, dec, max_len=config.max_len)
        pred = vocab.decode(trace.tokens)
        consistency = float(np.linalg.norm(trace.h_gen.values - agg.vector.values))
        retained_texts = [index.chunk(r.chunk_id).text for r in results]
        rate = _support_rate(tokenize(pred), retained_texts)
        preds.append(pred)
        golds.append(sample.answer)
        consistencies.append(consistency)
        if rate is not None:
            support_rates.append(rate)
        alphas = dict(weights.entries)
        records.append(
            {
                "id": sample.id,
                "retrieval_failure": False,
                "retrieved": [
                    {
                        "chunk_id": r.chunk_id,
                        "title": chunks[r.chunk_id][0],
                        "score": r.score,
                        "alpha": alphas[r.chunk_id],
                    }
                    for r in results
                ],
                "generated": pred,
                "em": exact_match(pred, sample.answer),
                "f1": token_f1(pred, sample.answer),
                "bleu": bleu([pred], [sample.answer]),
                "rouge_l": rouge_l(pred, sample.answer),
                "consistency": consistency,
                "support_rate": rate,
            }
        )
    metrics = score_corpus(preds, golds)
    return EvalReport(
        metrics=metrics,
        config=config.as_dict(),
        checkpoint_fingerprint=checkpoint_fingerprint(ckpt),
        samples=records,
        n_failures=n_failures,
        mean_consistency=float(np.mean(consistencies)) if consistencies else None,
        mean_support_rate=float(np.mean(support_rates)) if support_rates else None,
    )


def _check_grid(grid, name: str, minimum=None) -> list[float]:
    grid = [float(v) for v in grid]
    if any(b >= a for a, b in zip(grid[1:], grid)):
        raise ValueError(f"{name} grid must be strictly increasing")
    if minimum is not None and grid[0] < minimum:
        raise ValueError(f"{name} grid minimum is {minimum}")
    return grid


def sweep_alignment_weight(
    dataset: list[QASample],
    ckpt: Checkpoint,
    beta_grid,
    config: TrainConfig | None = None,
) -> SweepResult:
    """One evaluate() per beta, everything else fixed."""
    grid = _check_grid(beta_grid, "beta", minimum=0.0)
    if len(grid) < 3 or grid[0] != 0.0:
        raise ValueError("beta grid needs >= 3 strictly increasing values starting at 0")
    base = config if config is not None else ckpt.config
    reports = [
        evaluate(dataset, ckpt, dataclasses.replace(base, beta=b)) for b in grid
    ]
    return SweepResult(param_name="beta", grid=grid, reports=reports)


def sweep_top_k(
    dataset: list[QASample],
    ckpt: Checkpoint,
    k_grid,
    config: TrainConfig | None = None,
) -> SweepResult:
    """One evaluate() per retrieval depth k, everything else fixed."""
    grid = _check_grid([int(k) for k in k_grid], "top_k", minimum=1)
    base = config if config is not None else ckpt.config
    reports = [
        evaluate(dataset, ckpt, dataclasses.replace(base, top_k=int(k))) for k in grid
    ]
    return SweepResult(param_name="top_k", grid=grid, reports=reports)


# ---------------------------------------------------------------------------
# Report serialization: JSON, flat CSV, and a minimal SVG line chart.
# ---------------------------------------------------------------------------


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n"


def sweep_to_json(sweep: SweepResult) -> str:
    doc = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "param": sweep.param_name,
        "grid": sweep.grid,
        "reports": [r.as_dict() for r in sweep.reports],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def sweep_to_csv(sweep: SweepResult) -> str:
    lines = [f"{sweep.param_name},em,f1,bleu,rouge_l,mean_consistency"]
    for value, report in zip(sweep.grid, sweep.reports):
        m = report.metrics
        cons = "" if report.mean_consistency is None else f"{report.mean_consistency:.6f}"
        lines.append(
            f"{value:g},{m.em:.6f},{m.f1:.6f},{m.bleu:.6f},{m.rouge_l:.6f},{cons}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_svg(sweep: SweepResult, width: int = 480, height: int = 320) -> str:
    """EM versus the swept parameter as a bare SVG polyline."""
    pad = 40
    xs = sweep.grid
    ys = [r.metrics.em for r in sweep.reports]
    x_span = (xs[-1] - xs[0]) or 1.0
    points = []
    for x, y in zip(xs, ys):
        px = pad + (x - xs[0]) / x_span * (width - 2 * pad)
        py = height - pad - (y / 100.0) * (height - 2 * pad)
        points.append(f"{px:.2f},{py:.2f}")
    labels = "".join(
        f'<text x="{pad + i * (width - 2 * pad) / max(1, len(xs) - 1):.2f}" '
        f'y="{height - pad + 16}" font-size="10" text-anchor="middle">{x:g}</text>'
        for i, x in enumerate(xs)
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="{width}" height="{height}" fill="white"/>'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{" ".join(points)}"/>'
        f"{labels}"
        f'<text x="{width / 2:.0f}" y="{height - 6}" font-size="11" text-anchor="middle">'
        f"{sweep.param_name}</text>"
        f'<text x="12" y="{height / 2:.0f}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 12 {height / 2:.0f})">EM</text>'
        "</svg>\n"
    )
