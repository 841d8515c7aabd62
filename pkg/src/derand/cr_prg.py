"""Recursive width-reduction sampler for combinatorial rectangles.

The width schedule iterates v_{j+1} = floor(3 v_j / 4) from v_0 = w
down to the stop width.  Every inner stage j draws a lookup matrix
(2^{v_j} rows by m columns of width-v_{j-1} sign blocks) from one
small-bias string; the last stage draws m width-v_{t-1} blocks
directly.  Evaluation walks the stages backwards, each output block
selecting a row of the previous stage's matrix in its own column, so
for any rectangle f the evaluation satisfies
f(s_0(x)) = f^1(s_1(x)) = ... with f^j the rectangle restricted by the
j-th matrix.

Matrix bit layout within its biased string is column-major (all rows of
column 0, then column 1, ...), each entry serialized most significant
sign first.  Row indices are the big-endian packing of the selecting
block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .models import CombRect
from .signs import SignVector, pack_block
from .smallbias import BiasedSpaceSpec, GF2k, generate_biased

DEFAULT_BIAS_FLOOR = Fraction(1, 1 << 24)


def width_schedule(w: int, stop_width: int) -> Tuple[int, ...]:
    """Strictly decreasing widths from w to the first value <= stop_width."""
    sched = [w]
    while sched[-1] > stop_width:
        nxt = (3 * sched[-1]) // 4
        if nxt >= sched[-1]:  # cannot happen for w >= 1; guard anyway
            nxt = sched[-1] - 1
        sched.append(nxt)
    return tuple(sched)


@dataclass(frozen=True)
class CrConstants:
    inner_exp: int = 13   # c1: inner-stage bias delta^c1
    final_exp: int = 3    # c2 scale in the final-stage bias exponent

    def to_json(self) -> dict:
        return {"c1": self.inner_exp, "c2": self.final_exp}


@dataclass(frozen=True)
class CrGenParams:
    m: int
    w: int
    delta: Fraction
    schedule: Tuple[int, ...]
    stop_width: int
    stage_specs: Tuple[BiasedSpaceSpec, ...]  # inner matrix stages, then the direct stage
    constants: CrConstants
    floor_hits: Tuple[str, ...] = ()
    preset: str = ""

    @property
    def stages(self) -> int:
        return len(self.stage_specs)

    @property
    def direct_width(self) -> int:
        return self.schedule[-2] if len(self.schedule) >= 2 else self.schedule[0]

    @property
    def seed_bits(self) -> int:
        return sum(s.seed_bits for s in self.stage_specs)

    def stage_geometry(self, stage: int) -> tuple:
        """(rows, entry_width) of the lookup matrix at inner stage index
        ``stage`` (0-based among inner stages)."""
        rows = 1 << self.schedule[stage + 1]
        return rows, self.schedule[stage]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "w": self.w,
            "delta": str(self.delta),
            "schedule": list(self.schedule),
            "stopWidth": self.stop_width,
            "stages": [s.to_json() for s in self.stage_specs],
            "constants": self.constants.to_json(),
            "seedLengthBits": self.seed_bits,
            "floorHits": list(self.floor_hits),
            **({"preset": self.preset} if self.preset else {}),
        }


def asymptotic_stop_width(delta: Fraction) -> float:
    return 50 * math.log2(max(2.0, math.log2(1 / float(delta))))


def derive_cr_params(m: int, w: int, delta, constants: CrConstants = CrConstants(),
                     stop_width: int = 4,
                     bias_floor: Fraction | None = DEFAULT_BIAS_FLOOR) -> CrGenParams:
    """Formula-driven parameters: inner bias delta^c1, final bias
    delta^(c2 loglog(1/delta) logloglog(1/delta)), both floor-capped."""
    d = Fraction(delta)
    if not 0 < d < 1 or w < 1 or m < 1:
        raise ValueError("need m, w >= 1 and delta in (0,1)")
    sched = width_schedule(w, stop_width)
    t = len(sched) - 1
    hits = []
    eps1 = d**constants.inner_exp
    if bias_floor is not None and eps1 < bias_floor:
        eps1 = bias_floor
        hits.append("epsilon1")
    ll = math.log2(max(2.0, math.log2(1 / float(d))))
    lll = math.log2(max(2.0, ll))
    e2 = max(1, math.ceil(constants.final_exp * ll * lll))
    eps2 = d**e2
    if bias_floor is not None and eps2 < bias_floor:
        eps2 = bias_floor
        hits.append("epsilon2")
    specs = []
    for j in range(1, t):
        length = (1 << sched[j]) * m * sched[j - 1]
        specs.append(BiasedSpaceSpec.for_bias(length, eps1))
    direct_w = sched[t - 1] if t >= 1 else sched[0]
    specs.append(BiasedSpaceSpec.for_bias(m * direct_w, eps2))
    return CrGenParams(m=m, w=w, delta=d, schedule=sched, stop_width=stop_width,
                       stage_specs=tuple(specs), constants=constants,
                       floor_hits=tuple(hits))


def explicit_cr_params(m: int, w: int, delta, degrees, stop_width: int = 4,
                       constants: CrConstants = CrConstants(), preset: str = "") -> CrGenParams:
    """Pinned per-stage field degrees (inner stages then direct stage)."""
    d = Fraction(delta)
    sched = width_schedule(w, stop_width)
    t = len(sched) - 1
    expect = max(t, 1)
    if len(degrees) != expect:
        raise ValueError(f"schedule {sched} needs {expect} stage degrees")
    specs = []
    for j in range(1, t):
        length = (1 << sched[j]) * m * sched[j - 1]
        specs.append(BiasedSpaceSpec.with_degree(length, degrees[j - 1]))
    direct_w = sched[t - 1] if t >= 1 else sched[0]
    specs.append(BiasedSpaceSpec.with_degree(m * direct_w, degrees[-1]))
    return CrGenParams(m=m, w=w, delta=d, schedule=sched, stop_width=stop_width,
                       stage_specs=tuple(specs), constants=constants, preset=preset)


def desk_cr_preset(m: int = 8, w: int = 8) -> CrGenParams:
    """Exhaustive-scale preset: small enough for every-seed sweeps."""
    sched = width_schedule(w, 4)
    degrees = tuple([3] * max(len(sched) - 2, 0) + [4])
    return explicit_cr_params(m, w, Fraction(1, 16), degrees=degrees,
                              preset=f"desk-cr{m}x{w}")


# ---------------------------------------------------------------------------
# Lookup matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LookupMatrix:
    """One inner stage's table: entry [row, col] is a packed sign block."""

    rows: int
    cols: int
    entry_width: int
    packed: np.ndarray  # shape (rows, cols), int64 of big-endian packed entries

    def entry_signs(self, row: int, col: int) -> tuple:
        v = int(self.packed[row, col])
        return tuple(1 if (v >> (self.entry_width - 1 - q)) & 1 else -1
                     for q in range(self.entry_width))


def pack_matrix(signs: np.ndarray, rows: int, cols: int, entry_width: int) -> LookupMatrix:
    """Pack a stage's sign string into its lookup matrix.

    Bits are consumed column-major with entries MSB-first, so position
    col*(rows*W) + row*W + q carries bit (W-1-q) of entry [row, col].
    """
    expect = rows * cols * entry_width
    if len(signs) != expect:
        raise ValueError(f"stage string covers {len(signs)} positions, need {expect}")
    cube = np.asarray(signs, dtype=np.int8).reshape(cols, rows, entry_width)
    bits = (cube == 1).astype(np.int64)
    weights = 1 << np.arange(entry_width - 1, -1, -1, dtype=np.int64)
    packed = (bits * weights).sum(axis=2).T.copy()
    return LookupMatrix(rows=rows, cols=cols, entry_width=entry_width, packed=packed)


def materialize_matrix(spec: BiasedSpaceSpec, seed: int, rows: int, cols: int,
                       entry_width: int) -> LookupMatrix:
    """Expand a stage seed into its full lookup matrix."""
    signs = np.array(generate_biased(spec, seed).values, dtype=np.int8)
    return pack_matrix(signs, rows, cols, entry_width)


def _lazy_positions(spec: BiasedSpaceSpec, seed: int, start: int, count: int) -> list:
    """Signs at positions start..start+count-1 without expanding the string."""
    if spec.uniform:
        return [-1 if (seed >> (start + i)) & 1 else 1 for i in range(count)]
    k = spec.field_degree
    gf = GF2k(k)
    mask = (1 << k) - 1
    r = seed & mask
    s = (seed >> k) & mask
    power = gf.pow(s, start)
    out = []
    for _ in range(count):
        out.append(-1 if bin(r & power).count("1") & 1 else 1)
        power = gf.mul(power, s)
    return out


def split_cr_seed(params: CrGenParams, seed: int) -> list:
    if seed < 0 or seed >> params.seed_bits:
        raise ValueError(f"seed must fit in {params.seed_bits} bits")
    parts = []
    pos = 0
    for spec in params.stage_specs:
        parts.append((seed >> pos) & ((1 << spec.seed_bits) - 1))
        pos += spec.seed_bits
    return parts


def sample_cr_levels(params: CrGenParams, seed: int) -> list:
    """Per-level packed blocks of the recursive lookup, innermost first.

    Entry j of the result holds the m blocks at schedule width
    ``schedule[level]`` for level = stages-1 down to 0; the last entry
    is the generator output.  Each level's blocks index the rows of the
    previous stage's matrix in their own column.
    """
    parts = split_cr_seed(params, seed)
    t = len(params.stage_specs)
    direct_spec = params.stage_specs[-1]
    dw = params.direct_width
    direct = generate_biased(direct_spec, parts[-1])
    blocks = [pack_block(direct.values[i * dw:(i + 1) * dw]) for i in range(params.m)]
    levels = [tuple(blocks)]
    for stage in range(t - 2, -1, -1):
        rows, entry_w = params.stage_geometry(stage)
        spec = params.stage_specs[stage]
        nxt = []
        for i in range(params.m):
            row = blocks[i]
            start = i * (rows * entry_w) + row * entry_w
            signs = _lazy_positions(spec, parts[stage], start, entry_w)
            nxt.append(pack_block(signs))
        blocks = nxt
        levels.append(tuple(blocks))
    return levels


def unpack_blocks(blocks, width: int) -> tuple:
    out = []
    for b in blocks:
        out.extend(1 if (b >> (width - 1 - q)) & 1 else -1 for q in range(width))
    return tuple(out)


def sample_cr(params: CrGenParams, seed: int) -> SignVector:
    """Evaluate the recursive lookup; output is m blocks of w signs."""
    return SignVector(unpack_blocks(sample_cr_levels(params, seed)[-1], params.w))


def stage_matrices(params: CrGenParams, seed: int) -> list:
    """All inner-stage lookup matrices for a seed (the direct stage is
    returned by sample-side code as plain blocks)."""
    parts = split_cr_seed(params, seed)
    out = []
    for stage in range(len(params.stage_specs) - 1):
        rows, entry_w = params.stage_geometry(stage)
        out.append(materialize_matrix(params.stage_specs[stage], parts[stage],
                                      rows, params.m, entry_w))
    return out


# ---------------------------------------------------------------------------
# Restriction by a lookup matrix
# ---------------------------------------------------------------------------

def restrict_rect(rect: CombRect, matrix: LookupMatrix) -> CombRect:
    """Compose each coordinate with its column's lookup: the restricted
    table at row a holds the original flag of entry [a, i]."""
    if matrix.cols != rect.m or matrix.entry_width != rect.w:
        raise ValueError("matrix geometry does not match the rectangle")
    v = matrix.rows.bit_length() - 1
    if 1 << v != matrix.rows:
        raise ValueError("matrix row count must be a power of two")
    tables = []
    for i in range(rect.m):
        tbl = 0
        col = matrix.packed[:, i]
        for a in range(matrix.rows):
            if rect.coordinate_accepts(i, int(col[a])):
                tbl |= 1 << a
        tables.append(tbl)
    return CombRect(m=rect.m, w=v, tables=tuple(tables))


def bias_function_cr(rect: CombRect, matrix: LookupMatrix) -> Fraction:
    """Product over coordinates of the fraction of accepting rows; equals
    the restricted rectangle's exact expectation."""
    if matrix.cols != rect.m or matrix.entry_width != rect.w:
        raise ValueError("matrix geometry does not match the rectangle")
    acc = Fraction(1)
    for i in range(rect.m):
        col = matrix.packed[:, i]
        hits = sum(rect.coordinate_accepts(i, int(col[a])) for a in range(matrix.rows))
        acc *= Fraction(hits, matrix.rows)
    return acc


def rect_as_cnf_clauses(rect: CombRect) -> list:
    """The rectangle as a plain CNF: one width-w clause per rejecting
    block pattern per coordinate (general CNF, not read-once)."""
    clauses = []
    for i in range(rect.m):
        for a in range(1 << rect.w):
            if not rect.coordinate_accepts(i, a):
                clause = []
                for q in range(rect.w):
                    var = i * rect.w + q
                    bit = (a >> (rect.w - 1 - q)) & 1
                    clause.append((var, bit == 1))  # literal true iff x differs from a
                clauses.append(tuple(clause))
    return clauses


def eval_cnf_clauses(clauses: list, x) -> int:
    for clause in clauses:
        sat = False
        for var, negated in clause:
            if (x[var] == 1) != negated:
                sat = True
                break
        if not sat:
            return 0
    return 1
