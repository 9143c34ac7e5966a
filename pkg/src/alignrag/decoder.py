"""Evidence-constrained autoregressive decoder.

A single gated recurrent cell produces the generation state h_t; the
evidence aggregate e is concatenated with h_t at EVERY step before the
output projection, so the constraint is continuous rather than
prefix-only. Decoding is greedy by default and fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregation import EvidenceAggregate
from .encoder import EncoderParams, SemanticVector, encode
from .errors import DegenerateNorm, DimMismatch, EmptyTrace, InvalidTokenId
from .vocab import BOS_ID, EOS_ID, Vocabulary

DEFAULT_HIDDEN = 64
DEFAULT_MAX_LEN = 32
INIT_SCALE = 0.08

# Parameter tensor names and their shape builders, shared with training.
_GATE_NAMES = ("w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h")


@dataclass
class DecoderParams:
    """Recurrent cell, fusion/output projection, and pooling projection."""

    tensors: dict = field(default_factory=dict)

    @property
    def hidden(self) -> int:
        return self.tensors["w_z"].shape[0]

    @property
    def dim(self) -> int:
        return self.tensors["w_z"].shape[1]

    @property
    def vocab_size(self) -> int:
        return self.tensors["w_out"].shape[0]

    def __getitem__(self, name):
        return self.tensors[name]


def decoder_shapes(vocab_size: int, dim: int, hidden: int) -> dict[str, tuple]:
    shapes = {
        "embed": (vocab_size, dim),
        "w_init": (hidden, dim),
        "w_out": (vocab_size, hidden + dim),
        "b_out": (vocab_size,),
        "w_pool": (dim, hidden),
    }
    for name in _GATE_NAMES:
        if name.startswith("w_"):
            shapes[name] = (hidden, dim)
        elif name.startswith("u_"):
            shapes[name] = (hidden, hidden)
        else:
            shapes[name] = (hidden,)
    return shapes


def init_decoder_params(
    vocab_size: int, dim: int, hidden: int = DEFAULT_HIDDEN, seed: int = 0
) -> DecoderParams:
    """Seed-reproducible uniform init; biases (incl. output bias) start at zero."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in sorted(decoder_shapes(vocab_size, dim, hidden).items()):
        if name.startswith("b_"):
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
    return DecoderParams(tensors=tensors)


@dataclass
class GenerationTrace:
    tokens: list[int]
    step_states: list[np.ndarray]
    step_distributions: list[np.ndarray]
    h_gen: SemanticVector
    evidence_ref: EvidenceAggregate


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    expd = np.exp(shifted)
    return expd / expd.sum()


def fuse(h: np.ndarray, e: np.ndarray, params: DecoderParams) -> np.ndarray:
    """Output logits from the concatenated (generation state, evidence)."""
    w_out = params["w_out"]
    if h.shape[0] + e.shape[0] != w_out.shape[1]:
        raise DimMismatch(
            f"fuse expects H+D={w_out.shape[1]}, got {h.shape[0]}+{e.shape[0]}"
        )
    return w_out @ np.concatenate([h, e]) + params["b_out"]


def step(
    prev_token: int, h_prev: np.ndarray, e: np.ndarray, params: DecoderParams
) -> tuple[np.ndarray, np.ndarray]:
    """One gated recurrent update followed by evidence-fused softmax."""
    if not 0 <= prev_token < params.vocab_size:
        raise InvalidTokenId(f"token id {prev_token} outside vocabulary")
    x = params["embed"][prev_token]
    p = params.tensors
    z = _sigmoid(p["w_z"] @ x + p["u_z"] @ h_prev + p["b_z"])
    r = _sigmoid(p["w_r"] @ x + p["u_r"] @ h_prev + p["b_r"])
    h_cand = np.tanh(p["w_h"] @ x + p["u_h"] @ (r * h_prev) + p["b_h"])
    h = (1.0 - z) * h_prev + z * h_cand
    dist = _softmax(fuse(h, e, params))
    return dist, h


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def initial_state(query_vec: np.ndarray, params: DecoderParams) -> np.ndarray:
    return np.tanh(params["w_init"] @ query_vec)


def pooled_generation_repr(step_states, params: DecoderParams) -> SemanticVector:
    """Project the mean decoder state into the unified space and normalize."""
    if not step_states:
        raise EmptyTrace("no decoder states to pool")
    pooled = params["w_pool"] @ np.mean(step_states, axis=0)
    norm = np.linalg.norm(pooled)
    if norm < 1e-12:
        raise DegenerateNorm("pooled generation representation has near-zero norm")
    return SemanticVector(pooled / norm, normalized=True)


def decode_greedy(
    query: str,
    evidence: EvidenceAggregate,
    vocab: Vocabulary,
    enc_params: EncoderParams,
    dec_params: DecoderParams,
    max_len: int = DEFAULT_MAX_LEN,
) -> GenerationTrace:
    """Greedy decode; argmax ties resolve to the lowest token id."""
    q = encode(query, vocab, enc_params)
    return _decode(q, evidence, dec_params, max_len, rng=None)


def decode_sample(
    query: str,
    evidence: EvidenceAggregate,
    vocab: Vocabulary,
    enc_params: EncoderParams,
    dec_params: DecoderParams,
    max_len: int = DEFAULT_MAX_LEN,
    seed: int = 0,
) -> GenerationTrace:
    """Ancestral sampling behind a fixed seed; mainly for qualitative use."""
    q = encode(query, vocab, enc_params)
    return _decode(q, evidence, dec_params, max_len, rng=np.random.default_rng(seed))


def _decode(q, evidence, dec_params, max_len, rng) -> GenerationTrace:
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    e = evidence.vector.values
    h = initial_state(q.values, dec_params)
    tokens: list[int] = []
    states: list[np.ndarray] = []
    dists: list[np.ndarray] = []
    prev = BOS_ID
    for _ in range(max_len):
        dist, h = step(prev, h, e, dec_params)
        if rng is None:
            tok = int(np.argmax(dist))  # first (lowest-id) max wins
        else:
            tok = int(rng.choice(len(dist), p=dist))
        tokens.append(tok)
        states.append(h)
        dists.append(dist)
        prev = tok
        if tok == EOS_ID:
            break
    h_gen = pooled_generation_repr(states, dec_params)
    return GenerationTrace(
        tokens=tokens,
        step_states=states,
        step_distributions=dists,
        h_gen=h_gen,
        evidence_ref=evidence,
    )
