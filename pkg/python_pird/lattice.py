"""Redundancy lattice of source groups and Möbius inversion over it."""

import logging
from collections.abc import Iterator, Mapping, Sequence
from functools import cached_property, lru_cache
from itertools import combinations

from pydantic import BaseModel, ConfigDict, Field

from python_pird.exceptions import IncompleteInputError, InvalidSelectionError, LatticeSizeError

logger = logging.getLogger(__name__)

DEFAULT_MAX_SOURCES = 4

SourceSet = tuple[int, ...]
Atom = tuple[SourceSet, ...]


def make_source_set(members: Sequence[int], n_sources: int) -> SourceSet:
    """Validate and canonicalize a group of source indices.

    :param Sequence[int] members: Source indices (1-based)
    :param int n_sources: Number of sources in the lattice
    :return SourceSet: Sorted tuple of unique indices
    :raise InvalidSelectionError: If the group is empty, has duplicates or indices out of range
    """
    group = tuple(sorted(members))
    if not group:
        msg = "Source group must not be empty!"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if len(set(group)) != len(group):
        msg = f"Source group has duplicate members: {list(members)}"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if group[0] < 1 or group[-1] > n_sources:
        msg = f"Source group {list(group)} outside 1..{n_sources}"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    return group


def make_atom(groups: Sequence[Sequence[int]], n_sources: int) -> Atom:
    """Validate and canonicalize an antichain of source groups.

    :param Sequence[Sequence[int]] groups: Groups of 1-based source indices, e.g. [[1], [2]]
    :param int n_sources: Number of sources in the lattice
    :return Atom: Canonical atom (sorted groups, sorted lexicographically)
    :raise InvalidSelectionError: If the groups do not form a non-empty antichain
    """
    atom = tuple(sorted({make_source_set(group, n_sources) for group in groups}))
    if not atom:
        msg = "Atom must contain at least one group!"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    for a, b in combinations(atom, 2):
        if set(a) <= set(b) or set(b) <= set(a):
            msg = f"Groups {list(a)} and {list(b)} are nested, atom is not an antichain"
            logger.error(msg)
            raise InvalidSelectionError(msg)
    return atom


def precedes(a: Atom, b: Atom) -> bool:
    """Check the lattice order a ⪯ b.

    a precedes b iff every group of b contains some group of a.

    :param Atom a: Candidate lower atom
    :param Atom b: Candidate upper atom
    :return bool: True if a ⪯ b
    """
    return all(any(set(group_a) <= set(group_b) for group_a in a) for group_b in b)


def format_atom(atom: Atom) -> str:
    """Render an atom as a compact label, e.g. ``{1}{2}`` or ``{12}``.

    Indices above 9 are comma separated to stay unambiguous.

    :param Atom atom: The atom to render
    :return str: Label
    """
    separator = "," if any(member > 9 for group in atom for member in group) else ""  # noqa: PLR2004
    return "".join("{" + separator.join(str(member) for member in group) + "}" for group in atom)


def _antichains(subsets: list[SourceSet], start: int, chosen: list[SourceSet]) -> Iterator[Atom]:
    """Yield every non-empty antichain extending ``chosen`` with subsets from ``start`` onwards."""
    for index in range(start, len(subsets)):
        candidate = set(subsets[index])
        if any(candidate <= set(group) or set(group) <= candidate for group in chosen):
            continue
        chosen.append(subsets[index])
        yield tuple(sorted(chosen))
        yield from _antichains(subsets, index + 1, chosen)
        chosen.pop()


class RedundancyLattice(BaseModel):
    """Antichains of source groups ordered by ⪯.

    Atoms are stored in a canonical topological order: ascending size of the strict down-set, ties broken
    lexicographically, so the bottom atom comes first and the top atom last.
    """

    model_config = ConfigDict(frozen=True)

    n_sources: int = Field(description="Number of source processes N.")
    atoms: tuple[Atom, ...] = Field(description="All atoms in canonical topological order.")
    down_sets: tuple[tuple[int, ...], ...] = Field(
        description="For each atom, indices of the atoms strictly preceding it."
    )

    @cached_property
    def index(self) -> dict[Atom, int]:
        """Position of every atom in ``atoms``."""
        return {atom: position for position, atom in enumerate(self.atoms)}

    @cached_property
    def order(self) -> frozenset[tuple[int, int]]:
        """All pairs (i, j) of atom indices with atoms[i] ⪯ atoms[j], reflexive pairs included."""
        pairs = {(position, position) for position in range(len(self.atoms))}
        pairs.update((lower, upper) for upper, down in enumerate(self.down_sets) for lower in down)
        return frozenset(pairs)

    @property
    def bottom(self) -> Atom:
        """Fully redundant atom {{1},...,{N}}."""
        return self.atoms[0]

    @property
    def top(self) -> Atom:
        """Fully synergistic atom {{1..N}}."""
        return self.atoms[-1]

    def strict_down_set(self, atom: Atom) -> list[Atom]:
        """Atoms strictly preceding ``atom``.

        :param Atom atom: Atom of this lattice
        :return list[Atom]: Strictly preceding atoms in topological order
        """
        return [self.atoms[position] for position in self.down_sets[self.index[atom]]]

    def singleton(self, source: int) -> Atom:
        """Atom {{source}} carrying the self-redundancy of one source.

        :param int source: 1-based source index
        :return Atom: The singleton atom
        """
        return ((source,),)


@lru_cache(maxsize=16)
def enumerate_atoms(n_sources: int, max_sources: int = DEFAULT_MAX_SOURCES) -> RedundancyLattice:
    """Build the redundancy lattice over ``n_sources`` sources.

    :param int n_sources: Number of sources N
    :param int max_sources: Largest N accepted; atom counts grow super-exponentially
    :return RedundancyLattice: Lattice with atoms, order and down-sets
    :raise LatticeSizeError: If N is outside 1..max_sources
    """
    if not 1 <= n_sources <= max_sources:
        msg = f"Number of sources must be within 1..{max_sources}, got {n_sources}"
        logger.error(msg)
        raise LatticeSizeError(msg)

    sources = range(1, n_sources + 1)
    subsets = [group for size in sources for group in combinations(sources, size)]
    atoms = list(_antichains(subsets, 0, []))

    strict_down = {
        atom: [other for other in atoms if other != atom and precedes(other, atom)] for atom in atoms
    }
    atoms.sort(key=lambda atom: (len(strict_down[atom]), atom))
    position = {atom: i for i, atom in enumerate(atoms)}
    down_sets = tuple(tuple(sorted(position[other] for other in strict_down[atom])) for atom in atoms)

    logger.debug("Enumerated %d atoms for %d sources", len(atoms), n_sources)
    return RedundancyLattice(n_sources=n_sources, atoms=tuple(atoms), down_sets=down_sets)


def _require_complete(lattice: RedundancyLattice, values: Mapping[Atom, float]) -> None:
    if missing := [format_atom(atom) for atom in lattice.atoms if atom not in values]:
        msg = f"Missing values for atoms: {', '.join(missing)}"
        logger.error(msg)
        raise IncompleteInputError(msg)


def moebius_invert(lattice: RedundancyLattice, cumulative: Mapping[Atom, float]) -> dict[Atom, float]:
    """Recover atom values from cumulative redundancy values.

    partial(α) = cumulative(α) - Σ_{β≺α} partial(β), evaluated bottom-up.

    :param RedundancyLattice lattice: The lattice
    :param Mapping[Atom, float] cumulative: Redundancy value of every atom
    :return dict[Atom, float]: Partial value of every atom
    :raise IncompleteInputError: If an atom has no cumulative value
    """
    _require_complete(lattice, cumulative)
    partial: list[float] = []
    for atom, down in zip(lattice.atoms, lattice.down_sets, strict=True):
        partial.append(cumulative[atom] - sum(partial[position] for position in down))
    return dict(zip(lattice.atoms, partial, strict=True))


def accumulate(lattice: RedundancyLattice, partial: Mapping[Atom, float]) -> dict[Atom, float]:
    """Sum atom values over down-sets, the inverse of :func:`moebius_invert`.

    :param RedundancyLattice lattice: The lattice
    :param Mapping[Atom, float] partial: Partial value of every atom
    :return dict[Atom, float]: Cumulative value of every atom
    :raise IncompleteInputError: If an atom has no partial value
    """
    _require_complete(lattice, partial)
    return {
        atom: partial[atom] + sum(partial[lattice.atoms[position]] for position in down)
        for atom, down in zip(lattice.atoms, lattice.down_sets, strict=True)
    }


class AtomValues(BaseModel):
    """Cumulative and partial values aligned with the atoms of a lattice."""

    model_config = ConfigDict(frozen=True)

    atoms: tuple[Atom, ...] = Field(description="Atoms in lattice order.")
    cumulative: tuple[float, ...] = Field(description="Redundancy value per atom.")
    partial: tuple[float, ...] = Field(description="Atom value per atom.")

    @classmethod
    def from_cumulative(cls, lattice: RedundancyLattice, cumulative: Mapping[Atom, float]) -> "AtomValues":
        """Invert cumulative values and pack both views.

        :param RedundancyLattice lattice: The lattice
        :param Mapping[Atom, float] cumulative: Redundancy value of every atom
        :return AtomValues: Aligned cumulative and partial values
        """
        partial = moebius_invert(lattice, cumulative)
        return cls(
            atoms=lattice.atoms,
            cumulative=tuple(float(cumulative[atom]) for atom in lattice.atoms),
            partial=tuple(float(partial[atom]) for atom in lattice.atoms),
        )

    def partial_map(self) -> dict[Atom, float]:
        """Atom values keyed by atom."""
        return dict(zip(self.atoms, self.partial, strict=True))

    def cumulative_map(self) -> dict[Atom, float]:
        """Redundancy values keyed by atom."""
        return dict(zip(self.atoms, self.cumulative, strict=True))
