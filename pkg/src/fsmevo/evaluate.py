"""Fitness evaluation: bit-parallel over 64-bit words, plus a row-at-a-time
reference interpreter kept free of any shared evaluation code.

Packing convention: bit r of word column v holds the value of program
variable v in truth-table row r, where variable v is row-index bit v.
Row r lives in word r // 64 at bit r % 64.  Care columns are zero on the
padding bits past the last row, which neutralises the ones that the
bitwise complements smear into the padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cgp import NAND, Genotype, decode, node_eval
from .fsm import TruthTable

WORD_BITS = 64
_WORD_MASK = (1 << WORD_BITS) - 1

#: Exhaustive evaluation bound; every bundled benchmark is far below it.
MAX_VARS = 24


@dataclass(frozen=True)
class PackedTable:
    """Truth table packed into 64-bit word columns."""

    num_vars: int
    num_outs: int
    input_words: np.ndarray    # (num_vars, words_per_col) uint64
    desired_words: np.ndarray  # (num_outs, words_per_col) uint64
    care_words: np.ndarray     # (num_outs, words_per_col) uint64
    total_care: int

    @property
    def num_rows(self) -> int:
        return 1 << self.num_vars

    @property
    def words_per_col(self) -> int:
        return self.input_words.shape[1]


@dataclass(frozen=True)
class Fitness:
    mismatches: int
    rmse: float

    @classmethod
    def from_counts(cls, mismatches: int, total_care: int) -> "Fitness":
        rmse = math.sqrt(mismatches / total_care) if total_care else 0.0
        return cls(mismatches, rmse)


def _pack_bit_column(bits: np.ndarray, words_per_col: int) -> np.ndarray:
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    out = np.zeros(words_per_col * 8, dtype=np.uint8)
    out[: packed.size] = packed
    return out.view("<u8")


def pack_table(tt: TruthTable) -> PackedTable:
    if tt.num_vars > MAX_VARS:
        raise ValueError(
            f"{tt.num_vars} variables exceed the exhaustive bound of {MAX_VARS}"
        )
    rows = tt.num_rows
    words_per_col = (rows + WORD_BITS - 1) // WORD_BITS
    r = np.arange(rows, dtype=np.uint32)
    input_words = np.empty((tt.num_vars, words_per_col), dtype=np.uint64)
    for v in range(tt.num_vars):
        input_words[v] = _pack_bit_column((r >> v) & 1, words_per_col)
    desired_words = np.empty((tt.num_outs, words_per_col), dtype=np.uint64)
    care_words = np.empty((tt.num_outs, words_per_col), dtype=np.uint64)
    for o in range(tt.num_outs):
        desired_words[o] = _pack_bit_column(tt.desired[:, o], words_per_col)
        care_words[o] = _pack_bit_column(tt.care[:, o], words_per_col)
    return PackedTable(
        num_vars=tt.num_vars,
        num_outs=tt.num_outs,
        input_words=input_words,
        desired_words=desired_words,
        care_words=care_words,
        total_care=tt.total_care(),
    )


def _check_shapes(g: Genotype, num_vars: int, num_outs: int) -> None:
    if g.params.num_inputs != num_vars or g.params.num_outputs != num_outs:
        raise ValueError(
            f"genotype is {g.params.num_inputs}->{g.params.num_outputs}, "
            f"table is {num_vars}->{num_outs}"
        )


def evaluate(g: Genotype, pt: PackedTable) -> Fitness:
    """Bit-parallel fitness: all rows of one word column per gate operation."""
    _check_shapes(g, pt.num_vars, pt.num_outs)
    ph = decode(g)
    genes = g.genes
    n_i = g.params.num_inputs
    vals = [0] * (n_i + g.params.num_nodes)
    mismatches = 0
    for w in range(pt.words_per_col):
        for v in range(n_i):
            vals[v] = int(pt.input_words[v, w])
        for j in ph.active:
            b = 3 * j
            x, y = vals[genes[b + 1]], vals[genes[b + 2]]
            merged = x & y if genes[b] == NAND else x | y
            vals[n_i + j] = ~merged & _WORD_MASK
        for o, src in enumerate(ph.output_sources):
            diff = (vals[src] ^ int(pt.desired_words[o, w])) & int(pt.care_words[o, w])
            mismatches += diff.bit_count()
    return Fitness.from_counts(mismatches, pt.total_care)


def evaluate_scalar(g: Genotype, tt: TruthTable) -> Fitness:
    """Reference interpreter: one row at a time through the decoded graph.

    This is the independent oracle for :func:`evaluate`; it shares no
    evaluation code with the packed path.
    """
    _check_shapes(g, tt.num_vars, tt.num_outs)
    ph = decode(g)
    nodes = g.nodes
    n_i = g.params.num_inputs
    desired, care = tt.desired, tt.care
    mismatches = 0
    for r in range(tt.num_rows):
        vals = [(r >> v) & 1 for v in range(n_i)]
        vals += [0] * g.params.num_nodes
        for j in ph.active:
            f, a, b = nodes[j]
            vals[n_i + j] = node_eval(f, vals[a], vals[b])
        for o, src in enumerate(ph.output_sources):
            if care[r, o] and vals[src] != desired[r, o]:
                mismatches += 1
    return Fitness.from_counts(mismatches, tt.total_care())
