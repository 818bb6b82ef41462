"""Coarse-graining of 2D cells into effective chain and plaquette models.

Two one-step procedures:

* quasi-1D: a box of strips (width R) becomes a nearest-neighbor chain of
  metaspins, each block operator collecting the straddling terms plus half
  of each interior strip's internal terms (boundary strips contribute their
  internal terms whole to the single adjacent block);
* 2D: a rhomboid of boxes becomes a nearest-neighbor plaquette model, each
  interaction term equidistributed among the plaquettes whose corner boxes
  cover it (bulk denominators 4 / 2 / 1 for within-box / side-pair /
  corner-quad terms).

Both groupings reconstruct the original Hamiltonian exactly, and the
effective local projectors have the same kernel as the block operators they
normalize, which is what the sandwich bounds rest on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (
    Coord,
    InteractionShape,
    SiteRegion,
    box_center,
    box_region,
    box_sites,
    plaquette_corner_boxes,
    plaquette_set,
    rhomboid_sites,
    validate_cell_shapes,
)
from .operators import (
    ChainModel,
    InteractionCell,
    LocalProjector,
    SparseHermitianOperator,
    embed,
    projector_complement_kernel,
)

POSITIVE_EIG_RTOL = 1e-10


class CellRejection(ValueError):
    """A cell term straddles boxes in a way the plaquette grouping cannot host."""

    def __init__(self, message: str, witness):
        super().__init__(f"{message}; witness: {witness}")
        self.witness = witness


@dataclass(frozen=True)
class EffectiveModel1D:
    """Metaspin chain obtained from one quasi-1D coarse-graining step."""

    metaspin_dim: int
    P_eff: LocalProjector
    lambda_min: float
    lambda_max: float
    R: int
    m2: int

    def __post_init__(self):
        if not 0 < self.lambda_min <= self.lambda_max:
            raise ValueError("need 0 < lambda_min <= lambda_max")

    @property
    def C1(self) -> float:
        return self.lambda_min

    @property
    def C2(self) -> float:
        return 2.0 * self.lambda_max

    def chain_model(self) -> ChainModel:
        """The effective nearest-neighbor chain (no boundary projectors)."""
        zero = LocalProjector.zero(1, self.metaspin_dim)
        return ChainModel(self.metaspin_dim, self.P_eff, zero, zero)


@dataclass(frozen=True)
class EffectiveModel2D:
    """Metaspin plaquette model obtained from one 2D coarse-graining step."""

    metaspin_dim: int
    h_plaquette: LocalProjector
    lambda_min: float
    lambda_max: float
    R: int

    def __post_init__(self):
        if not 0 < self.lambda_min <= self.lambda_max:
            raise ValueError("need 0 < lambda_min <= lambda_max")

    @property
    def C1(self) -> float:
        return self.lambda_min

    @property
    def C2(self) -> float:
        return 4.0 * self.lambda_max


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def inflate_range(R: int, m1: int) -> int:
    """Smallest divisor of m1 that is >= R (the strip width actually used)."""
    if not 1 <= R <= m1:
        raise ValueError(f"need 1 <= R <= m1, got R={R}, m1={m1}")
    for candidate in range(R, m1 + 1):
        if m1 % candidate == 0:
            return candidate
    raise AssertionError("unreachable: m1 divides itself")


def _strip_of(site: Coord, R: int) -> int:
    return (site[0] - 1) // R + 1


def _translate(shape: InteractionShape, anchor: Coord) -> tuple[Coord, ...]:
    return tuple((anchor[0] + ox, anchor[1] + oy) for ox, oy in shape.offsets)


def _positive_spectrum_bounds(arr: np.ndarray) -> tuple[float, float]:
    vals = np.linalg.eigvalsh(arr)
    lam_max = float(vals[-1])
    if lam_max <= 0.0:
        raise ValueError("block operator is zero; no positive spectrum")
    positive = vals[vals > POSITIVE_EIG_RTOL * lam_max]
    return float(positive[0]), lam_max


def _permute_factors(arr: np.ndarray, region: SiteRegion, order, d: int) -> np.ndarray:
    """Reorder the tensor factors of a dense operator to the given site order."""
    perm = [region.index(site) for site in order]
    if perm == list(range(len(perm))):
        return arr
    n = len(perm)
    tensor = arr.reshape((d,) * (2 * n))
    tensor = np.transpose(tensor, axes=perm + [n + p for p in perm])
    return np.ascontiguousarray(tensor.reshape(arr.shape))


# ---------------------------------------------------------------------------
# quasi-1D grouping
# ---------------------------------------------------------------------------

def group_1d(
    cell: InteractionCell, m1: int, m2: int, R: int
) -> list[SparseHermitianOperator]:
    """Block operators of the strip grouping, embedded on the full box.

    Returns the m-1 operators (m = m1/R strips); their sum reconstructs
    region_hamiltonian(cell, box) exactly. Raises when R does not divide m1
    (callers inflate R via inflate_range first).
    """
    if m1 % R != 0:
        raise ValueError(f"strip width {R} does not divide m1 = {m1}; inflate R first")
    m = m1 // R
    if m < 2:
        raise ValueError(f"need at least two strips, got m = {m}")
    region = box_region(m1, m2)
    dim = cell.d ** len(region)
    blocks = [SparseHermitianOperator.zero(dim) for _ in range(m - 1)]
    for anchor in region.sites:
        for shape, proj in cell.terms:
            translate = _translate(shape, anchor)
            if not all(site in region for site in translate):
                continue
            strips = {_strip_of(site, R) for site in translate}
            term = embed(proj, translate, region, cell.d)
            if len(strips) == 1:
                j = strips.pop()
                if j == 1:
                    blocks[0] = blocks[0] + term
                elif j == m:
                    blocks[m - 2] = blocks[m - 2] + term
                else:
                    blocks[j - 2] = blocks[j - 2] + 0.5 * term
                    blocks[j - 1] = blocks[j - 1] + 0.5 * term
            elif len(strips) == 2 and max(strips) - min(strips) == 1:
                blocks[min(strips) - 1] = blocks[min(strips) - 1] + term
            else:
                raise CellRejection(
                    "term spans non-adjacent strips", (shape, anchor, sorted(strips))
                )
    return [b.assert_hermitian() for b in blocks]


def effective_1d(
    cell: InteractionCell,
    m2: int,
    R: int,
    metaspin_cap: int = 4096,
    dense_cap: int = 4096,
) -> EffectiveModel1D:
    """One quasi-1D coarse-graining step: bulk block -> effective bond projector.

    The bulk block operator is built on a standalone two-strip window
    (interior form: half-weighted within-strip terms plus all straddling
    terms); the effective bond projector is the complement of its kernel
    and the sandwich constants are its extreme positive eigenvalues.
    """
    d = cell.d
    metaspin_dim = d ** (R * m2)
    if metaspin_dim > metaspin_cap:
        raise ValueError(
            f"metaspin dimension overflow: {metaspin_dim} exceeds cap {metaspin_cap}"
        )
    pair_dim = metaspin_dim ** 2
    if pair_dim > dense_cap:
        raise ValueError(
            f"metaspin dimension overflow: two-strip block dimension {pair_dim} "
            f"exceeds dense cap {dense_cap}"
        )
    region = box_region(2 * R, m2)
    block = SparseHermitianOperator.zero(pair_dim)
    for anchor in region.sites:
        for shape, proj in cell.terms:
            translate = _translate(shape, anchor)
            if not all(site in region for site in translate):
                continue
            strips = {_strip_of(site, R) for site in translate}
            weight = 0.5 if len(strips) == 1 else 1.0
            block = block + weight * embed(proj, translate, region, d)
    arr = block.assert_hermitian().toarray()
    lam_min, lam_max = _positive_spectrum_bounds(arr)
    p_eff = LocalProjector(2, metaspin_dim, projector_complement_kernel(arr))
    return EffectiveModel1D(
        metaspin_dim=metaspin_dim,
        P_eff=p_eff,
        lambda_min=lam_min,
        lambda_max=lam_max,
        R=R,
        m2=m2,
    )


# ---------------------------------------------------------------------------
# 2D classification and grouping
# ---------------------------------------------------------------------------

def classify_translate(
    shape: InteractionShape, anchor: Coord, R: int
) -> tuple[str, tuple[Coord, ...]]:
    """Class of one translated term relative to the R-box partition.

    Returns (class, touched box centers) with class among within_box /
    side_pair / corner_quad; diagonal two-box and three-box straddles raise
    CellRejection.
    """
    boxes = sorted({box_center(site, R) for site in _translate(shape, anchor)})
    if len(boxes) == 1:
        return "within_box", tuple(boxes)
    if len(boxes) == 2:
        (x1, y1), (x2, y2) = boxes
        if (abs(x1 - x2), abs(y1 - y2)) in ((R, 0), (0, R)):
            return "side_pair", tuple(boxes)
        raise CellRejection(
            "term straddles two corner-touching boxes", (shape, anchor, tuple(boxes))
        )
    if len(boxes) == 3:
        raise CellRejection("term straddles three boxes", (shape, anchor, tuple(boxes)))
    xs = sorted({b[0] for b in boxes})
    ys = sorted({b[1] for b in boxes})
    if len(boxes) == 4 and len(xs) == 2 and len(ys) == 2 and xs[1] - xs[0] == R and ys[1] - ys[0] == R:
        return "corner_quad", tuple(boxes)
    raise CellRejection(
        "term spans more than a 2x2 block of boxes", (shape, anchor, tuple(boxes))
    )


def classify_2d(cell: InteractionCell, R: int) -> dict[str, list]:
    """Classify every translate of every cell term over one box period.

    Requires the strict 2D shape rules; raises CellRejection (with the
    witness translate) if any anchor produces a diagonal-pair or three-box
    straddle.
    """
    if R < 1 or R % 2 == 0:
        raise ValueError(f"box width R must be an odd positive integer, got {R}")
    violations = validate_cell_shapes([s for s, _ in cell.terms], R, strict_2d=True)
    if violations:
        raise ValueError(f"strict 2D shape validation failed: {violations}")
    out: dict[str, list] = {"within_box": [], "side_pair": [], "corner_quad": []}
    for index, (shape, _) in enumerate(cell.terms):
        for ax in range(R):
            for ay in range(R):
                kind, boxes = classify_translate(shape, (ax, ay), R)
                out[kind].append((index, (ax, ay), boxes))
    return out


_BULK_WEIGHTS = {"within_box": 0.25, "side_pair": 0.5, "corner_quad": 1.0}


def effective_2d(
    cell: InteractionCell,
    R: int,
    metaspin_cap: int = 4096,
    dense_cap: int = 4096,
) -> EffectiveModel2D:
    """One 2D coarse-graining step: bulk plaquette block -> effective projector.

    The bulk block is built on a standalone 2x2-box window with the bulk
    equidistribution weights (1/4 within-box, 1/2 side-pair, 1 corner-quad);
    its factors are ordered box-major (boxes sorted by center, sites sorted
    within each box) so the result is an operator on four metaspins.
    """
    classify_2d(cell, R)
    d = cell.d
    metaspin_dim = d ** (R * R)
    if metaspin_dim > metaspin_cap:
        raise ValueError(
            f"metaspin dimension overflow: {metaspin_dim} exceeds cap {metaspin_cap}"
        )
    window_dim = metaspin_dim ** 4
    if window_dim > dense_cap:
        raise ValueError(
            f"metaspin dimension overflow: plaquette block dimension {window_dim} "
            f"exceeds dense cap {dense_cap}"
        )
    centers = [(0, 0), (0, R), (R, 0), (R, R)]
    box_major = [site for center in centers for site in box_sites(center, R)]
    region = SiteRegion(box_major)
    block = SparseHermitianOperator.zero(window_dim)
    for anchor in region.sites:
        for shape, proj in cell.terms:
            translate = _translate(shape, anchor)
            if not all(site in region for site in translate):
                continue
            kind, _ = classify_translate(shape, anchor, R)
            block = block + _BULK_WEIGHTS[kind] * embed(proj, translate, region, d)
    arr = _permute_factors(block.assert_hermitian().toarray(), region, box_major, d)
    lam_min, lam_max = _positive_spectrum_bounds(arr)
    h_plaq = LocalProjector(4, metaspin_dim, projector_complement_kernel(arr))
    return EffectiveModel2D(
        metaspin_dim=metaspin_dim,
        h_plaquette=h_plaq,
        lambda_min=lam_min,
        lambda_max=lam_max,
        R=R,
    )


def group_2d(
    cell: InteractionCell, m1: int, m2: int, R: int = 1
) -> dict[Coord, SparseHermitianOperator]:
    """Plaquette block operators on a rhomboid, embedded on its full site set.

    Every translate inside the rhomboid is equidistributed among the
    plaquettes whose corner boxes cover all the boxes it touches; the
    blocks sum to the rhomboid Hamiltonian exactly.
    """
    region, _ = rhomboid_sites(m1, m2, R)
    plaqs = plaquette_set(m1, m2, R)
    corner_map = {p: frozenset(plaquette_corner_boxes(p, R)) for p in plaqs.plaquettes}
    dim = cell.d ** len(region)
    blocks = {p: SparseHermitianOperator.zero(dim) for p in plaqs.plaquettes}
    for anchor in region.sites:
        for shape, proj in cell.terms:
            translate = _translate(shape, anchor)
            if not all(site in region for site in translate):
                continue
            boxes = frozenset(box_center(site, R) for site in translate)
            eligible = [p for p, corners in corner_map.items() if boxes <= corners]
            if not eligible:
                raise CellRejection(
                    "translate's boxes are not covered by any plaquette",
                    (shape, anchor, tuple(sorted(boxes))),
                )
            term = embed(proj, translate, region, cell.d)
            weight = 1.0 / len(eligible)
            for p in eligible:
                blocks[p] = blocks[p] + weight * term
    return {p: b.assert_hermitian() for p, b in blocks.items()}


def plaquette_model_hamiltonian(
    eff: EffectiveModel2D, m1: int, m2: int
) -> SparseHermitianOperator:
    """Sum of the effective plaquette projector over all rhomboid plaquettes."""
    _, centers = rhomboid_sites(m1, m2, eff.R)
    region = SiteRegion(centers)
    plaqs = plaquette_set(m1, m2, eff.R)
    total = SparseHermitianOperator.zero(eff.metaspin_dim ** len(centers))
    for p in plaqs.plaquettes:
        corners = plaquette_corner_boxes(p, eff.R)
        total = total + embed(eff.h_plaquette, corners, region, eff.metaspin_dim)
    return total.assert_hermitian()
