"""Joint training of the encoder and decoder.

The objective combines teacher-forced negative log-likelihood with the
consistency penalty ||h_gen - e||_2 (smoothed at the origin), weighted
by lambda. All gradients come from the in-repo reverse-mode tape in
autodiff.py and are validated against central finite differences in the
test suite.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .data import QASample, evidence_texts
from .decoder import DecoderParams, decoder_shapes
from .encoder import EncoderParams, INIT_SCALE
from .errors import (
    DimMismatch,
    EmptyInput,
    EmptyScores,
    InvalidTokenId,
    LengthMismatch,
    NonFiniteLoss,
)
from .serialization import read_container, write_container
from .vocab import BOS_ID, EOS_ID, PAD_ID, Vocabulary

CHECKPOINT_FORMAT_VERSION = 1
CONS_EPS = 1e-12


@dataclass
class LossBreakdown:
    l_nll: float
    l_cons: float
    lambda_: float

    @property
    def l_joint(self) -> float:
        return self.l_nll + self.lambda_ * self.l_cons

    def as_dict(self) -> dict:
        return {
            "l_nll": self.l_nll,
            "l_cons": self.l_cons,
            "lambda": self.lambda_,
            "l_joint": self.l_joint,
        }


@dataclass
class TrainConfig:
    seed: int = 0
    dim: int = 64
    hidden: int = 64
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 8
    lambda_: float = 0.1
    beta: float = 1.0
    top_k: int = 5
    tau: float = -1.0
    max_len: int = 32
    hash_buckets: int = 64
    grad_check: bool = False
    freeze_encoder: bool = False
    differentiable_weights: bool = False
    oracle_evidence: bool = False
    include_title: bool = True

    def validate(self) -> None:
        if self.epochs < 0 or self.batch_size < 1 or self.top_k < 1 or self.max_len < 1:
            raise ValueError("epochs/batch_size/top_k/max_len must be positive")
        if self.learning_rate <= 0 or self.lambda_ < 0 or self.beta < 0:
            raise ValueError("learning_rate must be > 0; lambda and beta must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class Checkpoint:
    config: TrainConfig
    vocab: Vocabulary
    params: dict[str, np.ndarray]  # "enc_embed" plus decoder tensors
    log: list[LossBreakdown] = field(default_factory=list)

    @property
    def encoder(self) -> EncoderParams:
        return EncoderParams(
            embedding=self.params["enc_embed"], trainable=not self.config.freeze_encoder
        )

    @property
    def decoder(self) -> DecoderParams:
        return DecoderParams(
            tensors={k: v for k, v in self.params.items() if k != "enc_embed"}
        )


def init_params(vocab_size: int, dim: int, hidden: int, seed: int) -> dict[str, np.ndarray]:
    """Seed-reproducible parameter set for encoder plus decoder."""
    enc_rng = np.random.default_rng(seed)
    dec_rng = np.random.default_rng(seed + 1)
    params = {"enc_embed": enc_rng.uniform(-INIT_SCALE, INIT_SCALE, size=(vocab_size, dim))}
    for name, shape in sorted(decoder_shapes(vocab_size, dim, hidden).items()):
        if name.startswith("b_"):
            params[name] = np.zeros(shape)
        else:
            params[name] = dec_rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
    return params


# ---------------------------------------------------------------------------
# Plain-array loss operations (contract surface; oracles in tests).
# ---------------------------------------------------------------------------


def nll_loss(step_distributions, target_tokens) -> float:
    """Mean -log P(target) over steps; PAD positions are excluded."""
    if len(step_distributions) != len(target_tokens):
        raise LengthMismatch(
            f"{len(step_distributions)} distributions vs {len(target_tokens)} targets"
        )
    total = 0.0
    count = 0
    for dist, tgt in zip(step_distributions, target_tokens):
        if not 0 <= tgt < len(dist):
            raise InvalidTokenId(f"target id {tgt} outside distribution of size {len(dist)}")
        if tgt == PAD_ID:
            continue
        total += -math.log(dist[tgt])
        count += 1
    return total / count if count else 0.0


def consistency_loss(h_gen, e, eps: float = CONS_EPS) -> float:
    """Smoothed Euclidean distance: sqrt(||h_gen - e||^2 + eps) - sqrt(eps)."""
    hv = np.asarray(getattr(h_gen, "values", h_gen), dtype=np.float64)
    ev = np.asarray(getattr(e, "values", e), dtype=np.float64)
    if hv.shape != ev.shape:
        raise DimMismatch(f"dims differ: {hv.shape} vs {ev.shape}")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    diff = hv - ev
    return float(np.sqrt(diff @ diff + eps) - np.sqrt(eps))


# ---------------------------------------------------------------------------
# Tape forward: retrieval -> weights -> aggregate -> teacher-forced decode.
# ---------------------------------------------------------------------------


def _encode_tape(ids, embed: ad.Tensor) -> ad.Tensor:
    rows = ad.gather_rows(embed, ids)
    pooled = ad.mean_rows(rows)
    return ad.l2_normalize(pooled)


def _retained_evidence(sample: QASample, config: TrainConfig) -> list[tuple[str, str]]:
    chunks = evidence_texts(sample, include_title=config.include_title)
    if config.oracle_evidence:
        gold = {t for t, _ in sample.supporting_facts}
        chunks = [(t, text) for t, text in chunks if t in gold]
        if not chunks:
            raise EmptyScores(f"sample {sample.id}: no gold evidence to force")
    return chunks


def _evidence_tape(sample, vocab, embed: ad.Tensor, q: ad.Tensor, config):
    """Score, select, weight, and aggregate evidence on the tape."""
    chunks = _retained_evidence(sample, config)
    encoded = []
    for title, text in chunks:
        ids = vocab.encode(text)
        if not ids:
            raise EmptyInput(f"sample {sample.id}: chunk {title!r} tokenized to nothing")
        encoded.append(_encode_tape(ids, embed))
    scores = [ad.dot(q, d) for d in encoded]
    if config.oracle_evidence:
        picked = list(range(len(chunks)))
    else:
        order = sorted(range(len(chunks)), key=lambda i: (-scores[i].item(), i))
        picked = order[: config.top_k]
        picked = [i for i in picked if scores[i].item() >= config.tau]
        if not picked:
            raise EmptyScores(f"sample {sample.id}: threshold {config.tau} retained nothing")
    # Softmax over beta-scaled scores, max-subtracted for stability.
    m = max(scores[i].item() for i in picked)
    weights = [ad.exp(ad.scale(ad.sub(scores[i], ad.const(m)), config.beta)) for i in picked]
    total = weights[0]
    for w in weights[1:]:
        total = ad.add(total, w)
    inv_total = ad.reciprocal(total)
    alphas = [ad.mul(w, inv_total) for w in weights]
    if not config.differentiable_weights:
        alphas = [ad.detach(a) for a in alphas]
    e = ad.mul(alphas[0], encoded[picked[0]])
    for a, i in zip(alphas[1:], picked[1:]):
        e = ad.add(e, ad.mul(a, encoded[i]))
    return e


def _gru_step_tape(x: ad.Tensor, h: ad.Tensor, t: dict[str, ad.Tensor]) -> ad.Tensor:
    z = ad.sigmoid(ad.add(ad.add(ad.matvec(t["w_z"], x), ad.matvec(t["u_z"], h)), t["b_z"]))
    r = ad.sigmoid(ad.add(ad.add(ad.matvec(t["w_r"], x), ad.matvec(t["u_r"], h)), t["b_r"]))
    cand = ad.tanh(
        ad.add(ad.add(ad.matvec(t["w_h"], x), ad.matvec(t["u_h"], ad.mul(r, h))), t["b_h"])
    )
    one = ad.const(np.ones_like(h.value))
    return ad.add(ad.mul(ad.sub(one, z), h), ad.mul(z, cand))


def _loss_tape(sample: QASample, vocab: Vocabulary, tensors: dict[str, ad.Tensor], config):
    """Build the full joint-loss graph for one sample."""
    q_ids = vocab.encode(sample.question)
    if not q_ids:
        raise EmptyInput(f"sample {sample.id}: empty question after tokenization")
    embed = tensors["enc_embed"]
    if config.freeze_encoder:
        embed = ad.detach(embed)
    q = _encode_tape(q_ids, embed)
    e = _evidence_tape(sample, vocab, embed, q, config)

    answer_ids = vocab.encode(sample.answer)
    if not answer_ids:
        raise EmptyInput(f"sample {sample.id}: empty answer after tokenization")
    inputs = [BOS_ID] + answer_ids
    targets = answer_ids + [EOS_ID]

    h = ad.tanh(ad.matvec(tensors["w_init"], q))
    nll_terms = []
    state_sum = None
    for inp, tgt in zip(inputs, targets):
        x = ad.row(tensors["embed"], inp)
        h = _gru_step_tape(x, h, tensors)
        logits = ad.add(ad.matvec(tensors["w_out"], ad.concat(h, e)), tensors["b_out"])
        log_probs = ad.log_softmax(logits)
        nll_terms.append(ad.scale(ad.element(log_probs, tgt), -1.0))
        state_sum = h if state_sum is None else ad.add(state_sum, h)
    l_nll = nll_terms[0]
    for term in nll_terms[1:]:
        l_nll = ad.add(l_nll, term)
    l_nll = ad.scale(l_nll, 1.0 / len(nll_terms))

    mean_state = ad.scale(state_sum, 1.0 / len(targets))
    h_gen = ad.l2_normalize(ad.matvec(tensors["w_pool"], mean_state))
    diff = ad.sub(h_gen, e)
    l_cons = ad.sub(
        ad.sqrt(ad.add(ad.dot(diff, diff), ad.const(CONS_EPS))),
        ad.const(math.sqrt(CONS_EPS)),
    )
    l_joint = ad.add(l_nll, ad.scale(l_cons, config.lambda_))
    return l_nll, l_cons, l_joint


def _wrap_params(params: dict[str, np.ndarray]) -> dict[str, ad.Tensor]:
    return {name: ad.param(arr) for name, arr in params.items()}


def joint_loss(
    sample: QASample, vocab: Vocabulary, params: dict[str, np.ndarray], config: TrainConfig
) -> LossBreakdown:
    tensors = _wrap_params(params)
    l_nll, l_cons, _ = _loss_tape(sample, vocab, tensors, config)
    return LossBreakdown(l_nll=l_nll.item(), l_cons=l_cons.item(), lambda_=config.lambda_)


def joint_loss_and_grads(
    sample: QASample,
    vocab: Vocabulary,
    params: dict[str, np.ndarray],
    config: TrainConfig,
    component: str = "joint",
) -> tuple[LossBreakdown, dict[str, np.ndarray]]:
    """Loss breakdown plus gradients of the chosen component (nll/cons/joint)."""
    tensors = _wrap_params(params)
    l_nll, l_cons, l_joint = _loss_tape(sample, vocab, tensors, config)
    root = {"nll": l_nll, "cons": l_cons, "joint": l_joint}[component]
    ad.backward(root)
    grads = {
        name: (t.grad if t.grad is not None else np.zeros_like(t.value))
        for name, t in tensors.items()
    }
    breakdown = LossBreakdown(l_nll=l_nll.item(), l_cons=l_cons.item(), lambda_=config.lambda_)
    return breakdown, grads


# ---------------------------------------------------------------------------
# Optimization.
# ---------------------------------------------------------------------------


class Adam:
    """Adam with the conventional defaults (b1 0.9, b2 0.999)."""

    def __init__(self, lr: float, b1: float = 0.9, b2: float = 0.999, eps: float = 1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def update(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name in sorted(params):
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = self.b1 * self.m[name] + (1 - self.b1) * g
            self.v[name] = self.b2 * self.v[name] + (1 - self.b2) * g * g
            m_hat = self.m[name] / (1 - self.b1**self.t)
            v_hat = self.v[name] / (1 - self.b2**self.t)
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _dataset_texts(dataset: list[QASample]) -> list[str]:
    texts = []
    for s in dataset:
        texts.append(s.question)
        texts.append(s.answer)
        for title, text in evidence_texts(s):
            texts.append(text)
    return texts


def _mean_breakdown(items: list[LossBreakdown], lambda_: float) -> LossBreakdown:
    return LossBreakdown(
        l_nll=float(np.mean([b.l_nll for b in items])),
        l_cons=float(np.mean([b.l_cons for b in items])),
        lambda_=lambda_,
    )


def train(
    dataset: list[QASample], config: TrainConfig, vocab: Vocabulary | None = None
) -> Checkpoint:
    """Deterministic Adam training; per-epoch mean losses are logged.

    Log entry 0 is the joint loss at initialization, before any update.
    """
    if not dataset:
        raise EmptyScores("training dataset is empty")
    config.validate()
    if vocab is None:
        vocab = Vocabulary.from_texts(_dataset_texts(dataset), hash_buckets=config.hash_buckets)
    params = init_params(vocab.size, config.dim, config.hidden, config.seed)
    opt = Adam(lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)

    log = [_mean_breakdown([joint_loss(s, vocab, params, config) for s in dataset], config.lambda_)]
    _check_finite(log[0], "initialization")

    n = len(dataset)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            batch = [dataset[i] for i in order[start : start + config.batch_size]]
            grad_sum: dict[str, np.ndarray] = {}
            for sample in batch:
                breakdown, grads = joint_loss_and_grads(sample, vocab, params, config)
                _check_finite(breakdown, f"sample {sample.id} (epoch {epoch})")
                epoch_losses.append(breakdown)
                for name, g in grads.items():
                    grad_sum[name] = g if name not in grad_sum else grad_sum[name] + g
            mean_grads = {name: g / len(batch) for name, g in grad_sum.items()}
            opt.update(params, mean_grads)
        log.append(_mean_breakdown(epoch_losses, config.lambda_))
    return Checkpoint(config=config, vocab=vocab, params=params, log=log)


def _check_finite(breakdown: LossBreakdown, where: str) -> None:
    if not (math.isfinite(breakdown.l_nll) and math.isfinite(breakdown.l_cons)):
        raise NonFiniteLoss(f"non-finite loss at {where}: {breakdown.as_dict()}")


# ---------------------------------------------------------------------------
# Checkpoint persistence.
# ---------------------------------------------------------------------------


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    header = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": ckpt.config.as_dict(),
        "vocab": {"tokens": ckpt.vocab.tokens, "hash_buckets": ckpt.vocab.hash_buckets},
        "log": [b.as_dict() for b in ckpt.log],
    }
    write_container(path, "checkpoint", header, ckpt.params)


def load_checkpoint(path) -> Checkpoint:
    header, arrays = read_container(path, "checkpoint")
    config = TrainConfig.from_dict(header["config"])
    vocab = Vocabulary(header["vocab"]["tokens"], header["vocab"]["hash_buckets"])
    log = [
        LossBreakdown(l_nll=b["l_nll"], l_cons=b["l_cons"], lambda_=b["lambda"])
        for b in header["log"]
    ]
    return Checkpoint(config=config, vocab=vocab, params=arrays, log=log)


# ---------------------------------------------------------------------------
# Finite-difference utilities (used by tests and the grad_check toggle).
# ---------------------------------------------------------------------------


def numerical_gradient(loss_fn, params: dict[str, np.ndarray], name: str, index, h: float = 1e-5):
    """Central finite difference of loss_fn at one parameter coordinate."""
    original = params[name][index]
    params[name][index] = original + h
    up = loss_fn(params)
    params[name][index] = original - h
    down = loss_fn(params)
    params[name][index] = original
    return (up - down) / (2 * h)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
