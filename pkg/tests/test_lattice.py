"""Unit tests for the python_pird.lattice module."""

from itertools import product

import pytest

from python_pird.exceptions import IncompleteInputError, InvalidSelectionError, LatticeSizeError
from python_pird.lattice import (
    AtomValues,
    accumulate,
    enumerate_atoms,
    format_atom,
    make_atom,
    make_source_set,
    moebius_invert,
    precedes,
)


class TestMakeSourceSet:
    """Unit tests for the make_source_set function."""

    def test_canonical_order(self) -> None:
        """Test members are sorted."""
        assert make_source_set([3, 1], 3) == (1, 3)

    @pytest.mark.parametrize("members", [[], [1, 1], [0], [4]])
    def test_invalid_members(self, members: list[int]) -> None:
        """Test empty, duplicated and out-of-range groups are rejected."""
        with pytest.raises(InvalidSelectionError):
            make_source_set(members, 3)


class TestMakeAtom:
    """Unit tests for the make_atom function."""

    def test_canonical_order(self) -> None:
        """Test groups are canonicalized and sorted."""
        assert make_atom([[2], [1]], 2) == ((1,), (2,))

    def test_nested_groups(self) -> None:
        """Test groups contained in one another do not form an atom."""
        with pytest.raises(InvalidSelectionError, match="not an antichain"):
            make_atom([[1], [1, 2]], 2)


class TestPrecedes:
    """Unit tests for the precedes function."""

    def test_redundancy_below_synergy(self) -> None:
        """Test the fully redundant atom precedes the fully synergistic one."""
        assert precedes(((1,), (2,)), ((1, 2),))
        assert not precedes(((1, 2),), ((1,), (2,)))

    def test_reflexive(self) -> None:
        """Test every atom precedes itself."""
        assert precedes(((1,),), ((1,),))

    def test_incomparable(self) -> None:
        """Test singletons of different sources are incomparable."""
        assert not precedes(((1,),), ((2,),))
        assert not precedes(((2,),), ((1,),))

    @pytest.mark.parametrize("n_sources", [1, 2, 3])
    def test_partial_order(self, n_sources: int) -> None:
        """Test the order is reflexive and antisymmetric on every atom pair."""
        atoms = enumerate_atoms(n_sources).atoms
        for a, b in product(atoms, repeat=2):
            assert precedes(a, a)
            if precedes(a, b) and precedes(b, a):
                assert a == b

    @pytest.mark.parametrize("n_sources", [1, 2, 3])
    def test_transitive(self, n_sources: int) -> None:
        """Test the order is transitive on every atom triple."""
        atoms = enumerate_atoms(n_sources).atoms
        for a, b, c in product(atoms, repeat=3):
            if precedes(a, b) and precedes(b, c):
                assert precedes(a, c)


class TestFormatAtom:
    """Unit tests for the format_atom function."""

    def test_labels(self) -> None:
        """Test compact labels."""
        assert format_atom(((1,), (2,))) == "{1}{2}"
        assert format_atom(((1, 2),)) == "{12}"

    def test_large_indices(self) -> None:
        """Test indices above 9 are comma separated."""
        assert format_atom(((1, 10),)) == "{1,10}"


class TestEnumerateAtoms:
    """Unit tests for the enumerate_atoms function."""

    @pytest.mark.parametrize(("n_sources", "expected"), [(1, 1), (2, 4), (3, 18), (4, 166)])
    def test_atom_counts(self, n_sources: int, expected: int) -> None:
        """Test the number of atoms for every supported lattice size."""
        assert len(enumerate_atoms(n_sources).atoms) == expected

    def test_two_sources(self) -> None:
        """Test the order of the two-source lattice."""
        lattice = enumerate_atoms(2)
        assert lattice.atoms == (((1,), (2,)), ((1,),), ((2,),), ((1, 2),))
        assert lattice.bottom == ((1,), (2,))
        assert lattice.top == ((1, 2),)
        assert lattice.down_sets == ((), (0,), (0,), (0, 1, 2))

    @pytest.mark.parametrize("n_sources", [2, 3, 4])
    def test_topological_order(self, n_sources: int) -> None:
        """Test every atom comes after its strict down-set and the down-sets match the order."""
        lattice = enumerate_atoms(n_sources)
        for position, (atom, down) in enumerate(zip(lattice.atoms, lattice.down_sets, strict=True)):
            assert all(lower < position for lower in down)
            expected = {i for i, other in enumerate(lattice.atoms) if other != atom and precedes(other, atom)}
            assert set(down) == expected

    def test_strict_down_set(self) -> None:
        """Test the strict down-set of the top atom holds every other atom."""
        lattice = enumerate_atoms(3)
        assert len(lattice.strict_down_set(lattice.top)) == len(lattice.atoms) - 1
        assert lattice.strict_down_set(lattice.bottom) == []

    def test_order_pairs(self) -> None:
        """Test the order relation is reflexive and includes bottom below top."""
        lattice = enumerate_atoms(2)
        assert (0, 0) in lattice.order
        assert (0, 3) in lattice.order
        assert (1, 2) not in lattice.order

    @pytest.mark.parametrize("n_sources", [0, 5])
    def test_unsupported_size(self, n_sources: int) -> None:
        """Test lattice sizes outside 1..max_sources are rejected."""
        with pytest.raises(LatticeSizeError):
            enumerate_atoms(n_sources)

    def test_raised_limit(self) -> None:
        """Test the source limit is configurable."""
        with pytest.raises(LatticeSizeError, match=r"1\.\.2"):
            enumerate_atoms(3, max_sources=2)


class TestMoebiusInversion:
    """Unit tests for the moebius_invert and accumulate functions."""

    def test_two_source_atoms(self) -> None:
        """Test unique and synergistic atoms of the two-source lattice."""
        lattice = enumerate_atoms(2)
        cumulative = {((1,), (2,)): 0.2, ((1,),): 0.5, ((2,),): 0.3, ((1, 2),): 1.0}
        partial = moebius_invert(lattice, cumulative)
        assert partial[((1,), (2,))] == pytest.approx(0.2)
        assert partial[((1,),)] == pytest.approx(0.3)
        assert partial[((2,),)] == pytest.approx(0.1)
        assert partial[((1, 2),)] == pytest.approx(0.4)
        assert sum(partial.values()) == pytest.approx(cumulative[((1, 2),)])

    def test_accumulate_inverts(self) -> None:
        """Test accumulating atom values restores the cumulative values on a larger lattice."""
        lattice = enumerate_atoms(3)
        cumulative = {atom: float(len(lattice.strict_down_set(atom))) ** 0.5 for atom in lattice.atoms}
        restored = accumulate(lattice, moebius_invert(lattice, cumulative))
        for atom, value in cumulative.items():
            assert restored[atom] == pytest.approx(value, abs=1e-12)

    def test_incomplete_input(self) -> None:
        """Test a missing atom value is reported."""
        lattice = enumerate_atoms(2)
        with pytest.raises(IncompleteInputError, match=r"\{12\}"):
            moebius_invert(lattice, {((1,), (2,)): 0.0, ((1,),): 0.0, ((2,),): 0.0})


class TestAtomValues:
    """Unit tests for the AtomValues class."""

    def test_from_cumulative(self) -> None:
        """Test both views are aligned with the lattice."""
        lattice = enumerate_atoms(2)
        values = AtomValues.from_cumulative(lattice, {((1,), (2,)): 0.1, ((1,),): 0.1, ((2,),): 0.4, ((1, 2),): 0.6})
        assert values.atoms == lattice.atoms
        assert values.cumulative_map()[((2,),)] == pytest.approx(0.4)
        assert values.partial_map()[((2,),)] == pytest.approx(0.3)
        assert values.partial_map()[((1,),)] == pytest.approx(0.0)
