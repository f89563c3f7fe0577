"""Single-row Cartesian genetic programming over the NAND/NOR gate table.

A genotype is a flat integer tuple: three genes per node (function,
first connection, second connection), then one source gene per program
output::

    f0 c0a c0b   f1 c1a c1b   ...   o0 o1 ...

Addresses 0 .. n_i-1 name the program inputs, address n_i + j names node
j.  Gene constraints for the single-row, levels-back = column-count case:

* function gene:            0 <= f < 2      (0 = NAND, 1 = NOR)
* connection gene, node j:  0 <= c < n_i + j
* output gene:              0 <= o < n_i + m

Decoding walks backwards from the output genes; nodes never reached that
way are non-coding and carried along unchanged, which is what lets point
mutation drift through flat fitness regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rng import Xoshiro256StarStar

NAND = 0
NOR = 1
FUNCTIONS = ("NAND", "NOR")
NUM_FUNCTIONS = len(FUNCTIONS)
ARITY = 2


class GenotypeFormatError(ValueError):
    """Raised when genotype text cannot be parsed or validated."""


@dataclass(frozen=True)
class CgpParams:
    """Shape and mutation settings of a single-row CGP program.

    `mutation_rate` is a percentage of the total gene count; every
    offspring receives ``max(1, round(rate/100 * genes))`` point
    mutations.  With `strict_mutation` a mutated gene is redrawn until it
    differs from its old value (when its range permits a different one);
    by default the redraw may repeat the old value.
    """

    num_inputs: int
    num_outputs: int
    num_nodes: int
    mutation_rate: float = 10.0
    strict_mutation: bool = False

    def __post_init__(self):
        if self.num_inputs < 1:
            raise ValueError("need at least one program input")
        if self.num_outputs < 1:
            raise ValueError("need at least one program output")
        if self.num_nodes < 0:
            raise ValueError("node budget cannot be negative")
        if not 0 < self.mutation_rate <= 100:
            raise ValueError("mutation rate must be in (0, 100] percent")

    # single-row special case: one row, levels-back = number of columns
    @property
    def rows(self) -> int:
        return 1

    @property
    def levels_back(self) -> int:
        return self.num_nodes

    @property
    def gene_count(self) -> int:
        return (ARITY + 1) * self.num_nodes + self.num_outputs

    @property
    def mutations_per_offspring(self) -> int:
        # round half away from zero, floor of one mutation
        k = int(self.mutation_rate / 100.0 * self.gene_count + 0.5)
        return max(1, k)

    def gene_ranges(self) -> tuple[int, ...]:
        """Exclusive upper bound of the legal value range of every gene."""
        ranges = []
        for j in range(self.num_nodes):
            ranges += [NUM_FUNCTIONS, self.num_inputs + j, self.num_inputs + j]
        ranges += [self.num_inputs + self.num_nodes] * self.num_outputs
        return tuple(ranges)


@dataclass(frozen=True)
class Genotype:
    params: CgpParams
    genes: tuple[int, ...]

    def __post_init__(self):
        if len(self.genes) != self.params.gene_count:
            raise ValueError(
                f"expected {self.params.gene_count} genes, got {len(self.genes)}"
            )

    @property
    def nodes(self) -> tuple[tuple[int, int, int], ...]:
        g, m = self.genes, self.params.num_nodes
        return tuple((g[3 * j], g[3 * j + 1], g[3 * j + 2]) for j in range(m))

    @property
    def output_genes(self) -> tuple[int, ...]:
        return self.genes[3 * self.params.num_nodes :]


@dataclass(frozen=True)
class Phenotype:
    """Active part of a genotype: node columns in ascending (hence
    topological) order plus the resolved output source addresses."""

    active: tuple[int, ...]
    output_sources: tuple[int, ...]

    @property
    def num_gates(self) -> int:
        return len(self.active)


@dataclass(frozen=True)
class GeneViolation:
    index: int
    value: int
    bound: int
    kind: str = field(default="gene")

    def __str__(self) -> str:
        return (
            f"{self.kind} gene {self.index} has value {self.value}, "
            f"legal range is [0, {self.bound})"
        )


def validate_genotype(g: Genotype) -> GeneViolation | None:
    """Check every gene against its range; None means the genotype is valid.

    The bounds are the single-row specialisation of the general grid
    constraints: with r rows and l levels-back, a connection gene in
    column j may address [n_i + (j-l)r, n_i + jr) for j >= l and
    [0, n_i + jr) otherwise.  Here r = 1 and l = m, so every node may use
    any program input or any strictly earlier node.
    """
    m = g.params.num_nodes
    kinds = {0: "function", 1: "connection", 2: "connection"}
    for i, (value, bound) in enumerate(zip(g.genes, g.params.gene_ranges())):
        if not 0 <= value < bound:
            kind = kinds[i % 3] if i < 3 * m else "output"
            return GeneViolation(i, value, bound, kind)
    return None


def random_genotype(params: CgpParams, rng: Xoshiro256StarStar) -> Genotype:
    """Draw every gene uniformly from its legal range (in gene order)."""
    return Genotype(params, tuple(rng.randbelow(r) for r in params.gene_ranges()))


def mutate(g: Genotype, rng: Xoshiro256StarStar) -> Genotype:
    """Apply the configured number of point mutations to a copy of `g`.

    Each mutation draws a gene position, then a replacement value from
    that gene's full range.  Draw order (position, value, position,
    value, ...) is part of the reproducibility contract.
    """
    params = g.params
    ranges = params.gene_ranges()
    genes = list(g.genes)
    for _ in range(params.mutations_per_offspring):
        pos = rng.randbelow(params.gene_count)
        value = rng.randbelow(ranges[pos])
        if params.strict_mutation:
            while value == genes[pos] and ranges[pos] > 1:
                value = rng.randbelow(ranges[pos])
        genes[pos] = value
    return Genotype(params, tuple(genes))


def decode(g: Genotype) -> Phenotype:
    """Resolve the active node set by backward traversal from the outputs.

    Connections only ever point to strictly earlier columns, so one
    descending sweep after marking the output sources finds the closure.
    """
    n_i, m = g.params.num_inputs, g.params.num_nodes
    genes = g.genes
    needed = [False] * m
    out_sources = genes[3 * m :]
    for a in out_sources:
        if a >= n_i:
            needed[a - n_i] = True
    for j in range(m - 1, -1, -1):
        if needed[j]:
            for c in (genes[3 * j + 1], genes[3 * j + 2]):
                if c >= n_i:
                    needed[c - n_i] = True
    active = tuple(j for j in range(m) if needed[j])
    return Phenotype(active=active, output_sources=tuple(out_sources))


def node_eval(f: int, x: int, y: int) -> int:
    """Evaluate one gate on single bits: 0 = NAND, 1 = NOR."""
    if f == NAND:
        return (x & y) ^ 1
    if f == NOR:
        return (x | y) ^ 1
    raise ValueError(f"unknown function index {f}")


# --------------------------------------------------------------------------
# Text serialisation
#
# Two lines: a header `cgp <n_i> <n_o> <m>` and the gene list written as
# `f c1 c2 | f c1 c2 | ... || o0 o1 ...` (with `||` alone when m = 0).

def genotype_to_text(g: Genotype) -> str:
    p = g.params
    nodes = " | ".join(" ".join(map(str, node)) for node in g.nodes)
    outs = " ".join(map(str, g.output_genes))
    body = f"{nodes} || {outs}" if nodes else f"|| {outs}"
    return f"cgp {p.num_inputs} {p.num_outputs} {p.num_nodes}\n{body}\n"


def genotype_from_text(
    text: str, mutation_rate: float = 10.0, strict_mutation: bool = False
) -> Genotype:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise GenotypeFormatError("expected a header line and a gene line")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "cgp":
        raise GenotypeFormatError(f"bad header {lines[0]!r}")
    try:
        n_i, n_o, m = (int(v) for v in header[1:])
    except ValueError as exc:
        raise GenotypeFormatError(f"bad header {lines[0]!r}") from exc
    node_part, sep, out_part = lines[1].partition("||")
    if not sep:
        raise GenotypeFormatError("gene line misses the '||' output separator")
    try:
        genes: list[int] = []
        node_part = node_part.strip()
        for chunk in node_part.split("|") if node_part else []:
            triple = [int(v) for v in chunk.split()]
            if len(triple) != 3:
                raise GenotypeFormatError(f"bad node triple {chunk.strip()!r}")
            genes += triple
        genes += [int(v) for v in out_part.split()]
    except ValueError as exc:
        raise GenotypeFormatError(f"bad gene value in {lines[1]!r}") from exc
    params = CgpParams(n_i, n_o, m, mutation_rate, strict_mutation)
    if len(genes) != params.gene_count:
        raise GenotypeFormatError(
            f"expected {params.gene_count} genes, got {len(genes)}"
        )
    g = Genotype(params, tuple(genes))
    violation = validate_genotype(g)
    if violation is not None:
        raise GenotypeFormatError(str(violation))
    return g
