"""Iterated-restriction generator for read-once CNFs and parity-CNFs.

One round draws a subset J_t from an almost-independent sampler and a
sign string z^t from a small-bias space; the freshly covered indices
I_t = J_t minus earlier rounds get their z^t signs.  After T rounds the
remaining indices are filled from one final small-bias string y.  The
same generator serves formulas with parity terms unchanged.

Two parameterization paths exist:

* ``derive_params`` follows the asymptotic recipe with explicit
  constants, capping the demanded biases at a configured floor (the
  formula-driven biases are astronomically small even at toy sizes;
  the derived record reports the honest seed length either way).
* ``desk_preset`` fixes small field degrees whose full seed space can
  be enumerated exhaustively, for measured (not claimed) error.

Seed layout, fixed for bit-exact reproducibility: the T z-blocks in
round order occupy the lowest bits, then the T J-blocks, then y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .signs import SignVector
from .smallbias import (BiasedSpaceSpec, SubsetSamplerSpec, generate_biased,
                        sample_subset)

DEFAULT_BIAS_FLOOR = Fraction(1, 1 << 24)


@dataclass(frozen=True)
class GenConstants:
    """The asymptotic recipe's free constants, made concrete."""

    rounds_scale: Fraction = Fraction(1)   # C in T = ceil(C loglog n)
    subset_exp: int = 2                    # c in the J-sampler slack (eps/n)^c
    width_cut: int = 13                    # c1, small-width cutoff scale (> 12)
    shrink_exp: int = 3                    # c2 in the shrink/final-bias recipe
    shrink_gamma: Fraction = Fraction(1, 8)  # gamma, per-round size decay

    def to_json(self) -> dict:
        return {
            "C": str(self.rounds_scale),
            "c": self.subset_exp,
            "c1": self.width_cut,
            "c2": self.shrink_exp,
            "gamma": str(self.shrink_gamma),
        }


@dataclass(frozen=True)
class RcnfGenParams:
    n: int
    epsilon: Fraction
    rounds: int
    bits_per_index: int
    z_spec: BiasedSpaceSpec
    subset_spec: SubsetSamplerSpec
    y_spec: BiasedSpaceSpec
    constants: GenConstants
    delta: Fraction
    floor_hits: Tuple[str, ...] = ()
    preset: str = ""

    @property
    def alpha(self) -> Fraction:
        return Fraction(1, 1 << self.bits_per_index)

    @property
    def delta1(self) -> Fraction:
        return self.z_spec.epsilon

    @property
    def delta2(self) -> Fraction:
        return self.y_spec.epsilon

    @property
    def seed_bits(self) -> int:
        return (self.rounds * (self.z_spec.seed_bits + self.subset_spec.seed_bits)
                + self.y_spec.seed_bits)

    def bias_budget(self, surviving_l1: Fraction | None = None) -> Fraction:
        """The configured error budget delta1 * L * T + 2 eps T (may
        exceed 1 at desk scale; reported, and capped at 1 when used)."""
        L = surviving_l1 if surviving_l1 is not None else sandwich_norm_bound(
            self.n, self.epsilon, self.constants)
        return self.delta1 * L * self.rounds + 2 * self.epsilon * self.rounds

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "epsilon": str(self.epsilon),
            "rounds": self.rounds,
            "alpha": str(self.alpha),
            "delta": str(self.delta),
            "delta1": str(self.delta1),
            "delta2": str(self.delta2),
            "zSpace": self.z_spec.to_json(),
            "subsetSampler": self.subset_spec.to_json(),
            "ySpace": self.y_spec.to_json(),
            "constants": self.constants.to_json(),
            "seedLengthBits": self.seed_bits,
            "floorHits": list(self.floor_hits),
            **({"preset": self.preset} if self.preset else {}),
        }


def sandwich_norm_bound(n: int, epsilon: Fraction, constants: GenConstants) -> Fraction:
    """L(n, eps) = (n/eps)^ceil(c * (loglog(n/eps))^2), exponent rounded up."""
    ratio = Fraction(n) / epsilon
    loglog = math.log2(max(math.log2(float(ratio)), 2.0))
    exponent = math.ceil(constants.subset_exp * loglog * loglog)
    return ratio**exponent


def shrink_size_bound(n: int, epsilon: Fraction, m: int, constants: GenConstants) -> float:
    """Surviving-clause budget (log2(n/eps))^c2 * m^(1-gamma) per round."""
    lg = math.log2(float(Fraction(n) / epsilon))
    return lg**constants.shrink_exp * m ** float(1 - constants.shrink_gamma)


def derive_params(n: int, epsilon, constants: GenConstants = GenConstants(),
                  bits_per_index: int = 5, bias_floor: Fraction | None = DEFAULT_BIAS_FLOOR,
                  subset_max_arity: int = 3) -> RcnfGenParams:
    """Concrete parameters from the asymptotic recipe.

    Raises nothing on floor collisions: the capped record carries a
    diagnostic list in ``floor_hits`` (the suggested alternative for
    exhaustive work is ``desk_preset``).
    """
    eps = Fraction(epsilon)
    if not 0 < eps < 1 or n < 2:
        raise ValueError("need n >= 2 and epsilon in (0,1)")
    rounds = max(1, math.ceil(float(constants.rounds_scale)
                              * math.log2(math.log2(max(n, 4)))))
    hits = []
    delta = (eps / n) ** constants.subset_exp
    delta1 = eps / sandwich_norm_bound(n, eps, constants)
    if bias_floor is not None and delta1 < bias_floor:
        delta1 = bias_floor
        hits.append("delta1")
    lg_ratio = math.log2(float(Fraction(n) / eps))
    big_m = max(2, math.ceil(lg_ratio ** (constants.shrink_exp * rounds)))
    e2 = math.ceil(constants.shrink_exp * math.log2(1 / float(eps)))
    delta2 = Fraction(1, big_m**max(e2, 1))
    if bias_floor is not None and delta2 < bias_floor:
        delta2 = bias_floor
        hits.append("delta2")
    subset = SubsetSamplerSpec.build(n, bits_per_index, delta,
                                     max_arity=subset_max_arity, bias_floor=bias_floor)
    if bias_floor is not None and subset.base.epsilon == bias_floor:
        hits.append("subset")
    return RcnfGenParams(
        n=n, epsilon=eps, rounds=rounds, bits_per_index=bits_per_index,
        z_spec=BiasedSpaceSpec.for_bias(n, delta1),
        subset_spec=subset,
        y_spec=BiasedSpaceSpec.for_bias(n, delta2),
        constants=constants, delta=delta, floor_hits=tuple(hits),
    )


def explicit_params(n: int, epsilon, k_subset: int, k_z: int, k_y: int,
                    rounds: int = 1, bits_per_index: int = 5,
                    constants: GenConstants = GenConstants(), preset: str = "") -> RcnfGenParams:
    """Directly pinned field degrees; biases are whatever those degrees give."""
    eps = Fraction(epsilon)
    return RcnfGenParams(
        n=n, epsilon=eps, rounds=rounds, bits_per_index=bits_per_index,
        z_spec=BiasedSpaceSpec.with_degree(n, k_z),
        subset_spec=SubsetSamplerSpec.with_degree(n, bits_per_index, k_subset,
                                                  delta=(eps / n) ** constants.subset_exp),
        y_spec=BiasedSpaceSpec.with_degree(n, k_y),
        constants=constants, delta=(eps / n) ** constants.subset_exp,
        preset=preset,
    )


def desk_preset() -> RcnfGenParams:
    """The frozen exhaustive-scale preset: n=64, eps=1/16, 26 seed bits."""
    return explicit_params(64, Fraction(1, 16), k_subset=3, k_z=3, k_y=7,
                           rounds=1, bits_per_index=5, preset="desk64")


def hsg_inner_preset(n: int) -> RcnfGenParams:
    """Small preset used inside the width-3 hitting generator (n <= 16)."""
    return explicit_params(n, Fraction(1, 4), k_subset=2, k_z=3, k_y=6,
                           rounds=1, bits_per_index=5, preset=f"hsg{n}")


def split_seed(params: RcnfGenParams, seed: int):
    if seed < 0 or seed >> params.seed_bits:
        raise ValueError(f"seed must fit in {params.seed_bits} bits")
    zs = []
    js = []
    pos = 0
    for _ in range(params.rounds):
        zs.append((seed >> pos) & ((1 << params.z_spec.seed_bits) - 1))
        pos += params.z_spec.seed_bits
    for _ in range(params.rounds):
        js.append((seed >> pos) & ((1 << params.subset_spec.seed_bits) - 1))
        pos += params.subset_spec.seed_bits
    y = (seed >> pos) & ((1 << params.y_spec.seed_bits) - 1)
    return zs, js, y


def restriction_trace(params: RcnfGenParams, seed: int):
    """The per-round restrictions (I_t, signs on I_t) plus the fill string.

    Reassembling the trace reproduces sample() exactly; the I_t are
    disjoint by construction.
    """
    z_seeds, j_seeds, y_seed = split_seed(params, seed)
    covered: set = set()
    trace = []
    for t in range(params.rounds):
        z = generate_biased(params.z_spec, z_seeds[t])
        j = sample_subset(params.subset_spec, j_seeds[t])
        fresh = frozenset(j - covered)
        covered |= fresh
        trace.append((fresh, {i: z[i] for i in fresh}))
    y = generate_biased(params.y_spec, y_seed)
    return trace, y


def sample(params: RcnfGenParams, seed: int) -> SignVector:
    """Generator output: restricted indices keep their round's z sign,
    the rest take y."""
    trace, y = restriction_trace(params, seed)
    out = list(y.values)
    for _, assigned in trace:
        for i, s in assigned.items():
            out[i] = s
    return SignVector(tuple(out))


# The parity-CNF acceptance suite binds to the same generator: parities
# are handled at the small-bias level, no pipeline change needed.
sample_for_xorcnf = sample
