"""Tests for symbol constructors and the dyadic block machinery."""

import json
import tempfile
from pathlib import Path

import numpy as np
import pytest

from schurlab.core.errors import (
    ContractionError,
    DecompositionError,
    DimensionError,
    MonotonicityError,
    PartitionError,
    PreconditionError,
    ResolutionError,
    UnknownConstructionError,
)
from schurlab.core.hilbert import VectorFamily, scalar_family
from schurlab.core.schur import custom_symbol
from schurlab.core.symbols import (
    CONSTRUCTIONS,
    DyadicBlocks,
    FunctionTable,
    TriangularData,
    arazy_hilbert_realization,
    arazy_sqrt_symbol,
    arcsin_symbol,
    assemble_from_blocks,
    beta_divided_symbol,
    block_square_function,
    build_symbol,
    corner_embed,
    dyadic_blocks,
    dyadic_variation,
    gh_symbol,
    hilbert_divided_symbol,
    holder_divided_symbol,
    imaginary_power_symbol,
    marcinkiewicz_decompose,
    marcinkiewicz_symbol,
    mikhlin_condition,
    one_sided_symbol,
    random_family,
    random_monotone_table,
    restrict_to_block,
    sup_distances,
    triangular_gh_families,
    triangular_symbol,
    uniform_grid,
)
from schurlab.core.vector_valued import rc_norm


def families(n: int, d: int, seed: int) -> list[VectorFamily]:
    rng = np.random.default_rng(seed)
    return [random_family(n, d, rng) for _ in range(4)]


class TestGhSymbol:
    """Tests for gh_symbol and corner_embed."""

    def test_self_pairing_is_one(self) -> None:
        u, up, _, _ = families(4, 2, 0)

        M = gh_symbol(u, up, u, up)

        np.testing.assert_allclose(M.entries, np.ones((4, 4)), atol=1e-12)

    def test_bounded_by_one(self) -> None:
        u, up, w, wp = families(5, 3, 1)
        Lambda = np.diag([1.0, 0.5, -0.25])

        assert gh_symbol(u, up, w, wp, Lambda).sup <= 1.0 + 1e-12

    def test_degenerate_pairs_flagged(self) -> None:
        u = scalar_family([1.0, 2.0])
        up = scalar_family([-1.0, 0.0])
        w = scalar_family([1.0, 1.0])
        wp = scalar_family([0.0, 0.0])

        M = gh_symbol(u, up, w, wp)

        assert M.degenerate is not None
        assert M.degenerate[0, 0]
        assert M.entries[0, 0] == 0.0
        assert M.entries[1, 1] == pytest.approx(1.0)

    def test_rejects_expanding_operator(self) -> None:
        u, up, w, wp = families(3, 2, 2)

        with pytest.raises(ContractionError, match="exceeds 1"):
            gh_symbol(u, up, w, wp, 2.0 * np.eye(2))

    def test_rejects_mismatched_index_sets(self) -> None:
        u, up, w, _ = families(3, 2, 3)

        with pytest.raises(DimensionError, match="index set"):
            gh_symbol(u, up, w, random_family(2, 2, np.random.default_rng(0)))

    def test_corner_reproduces_symbol(self) -> None:
        u, up, w, wp = families(4, 2, 4)

        embedding = corner_embed(u, up, w, wp)

        assert embedding.residual <= 1e-12
        assert embedding.symbol.size == 8
        assert embedding.symbol.labels[0] == (1, 0)

    def test_single_index_corner(self) -> None:
        u, up, w, wp = families(1, 2, 5)

        embedding = corner_embed(u, up, w, wp)

        assert embedding.corner.shape == (1, 1)
        assert embedding.corner[0, 0] == pytest.approx(gh_symbol(u, up, w, wp).entries[0, 0])


class TestDividedDifferences:
    """Tests for the divided-difference constructions."""

    def test_identity_function(self) -> None:
        grid = np.linspace(0.0, 1.0, 5)
        f = FunctionTable(grid, grid)

        np.testing.assert_allclose(arazy_sqrt_symbol(f, grid).entries, np.ones((5, 5)), atol=1e-12)
        np.testing.assert_allclose(beta_divided_symbol(f, 0.3, grid).entries, np.ones((5, 5)), atol=1e-12)

    def test_kink(self) -> None:
        f = FunctionTable(np.array([-1.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0]))

        M = arazy_sqrt_symbol(f, [-1.0, 1.0])

        assert M.entries[1, 0].real == pytest.approx(np.sqrt(0.5))

    def test_linear_function(self) -> None:
        grid = np.linspace(0.0, 2.0, 4)
        f = FunctionTable(grid, 2.0 * grid)

        np.testing.assert_allclose(beta_divided_symbol(f, 0.25, grid).entries, 2.0**0.25, atol=1e-12)

    def test_half_power_is_arazy(self) -> None:
        f, grid = random_monotone_table(6, 3.0, np.random.default_rng(6))

        np.testing.assert_array_equal(
            beta_divided_symbol(f, 0.5, grid).entries, arazy_sqrt_symbol(f, grid).entries
        )

    def test_caps(self) -> None:
        f, grid = random_monotone_table(8, 2.0, np.random.default_rng(7))
        A = arazy_sqrt_symbol(f, grid)
        B = beta_divided_symbol(f, 0.25, grid)

        assert A.provenance.params["lip"] == pytest.approx(2.0)
        assert np.all(A.entries.real >= 0.0)
        assert A.sup <= np.sqrt(2.0) + 1e-12
        assert B.sup <= 2.0**0.25 + 1e-12

    def test_rejects_decreasing(self) -> None:
        f = FunctionTable(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.5]))

        with pytest.raises(MonotonicityError, match="decreases"):
            arazy_sqrt_symbol(f, [0.0, 1.0, 2.0])

    def test_rejects_beta_out_of_range(self) -> None:
        grid = np.linspace(0.0, 1.0, 3)

        with pytest.raises(PreconditionError, match="beta"):
            beta_divided_symbol(FunctionTable(grid, grid), 1.0, grid)

    def test_hilbert_divided(self) -> None:
        w = random_family(4, 3, np.random.default_rng(8))
        off = ~np.eye(4, dtype=bool)

        np.testing.assert_allclose(hilbert_divided_symbol(w).entries[off], 1.0, atol=1e-12)
        assert not np.any(hilbert_divided_symbol(w, np.zeros((3, 3))).entries)

    def test_hilbert_divided_bounded_by_operator_norm(self) -> None:
        w = random_family(5, 2, np.random.default_rng(9))
        Lambda = np.array([[0.5, 0.0], [0.0, 0.25]])

        assert hilbert_divided_symbol(w, Lambda).sup <= 0.5 + 1e-12

    def test_hilbert_realization_of_arazy(self) -> None:
        f, grid = random_monotone_table(7, 1.5, np.random.default_rng(10))
        real = arazy_hilbert_realization(f, grid)
        off = ~np.eye(7, dtype=bool)

        via_hilbert = np.sqrt(real.lip) * hilbert_divided_symbol(real.family, real.Lambda).entries

        np.testing.assert_allclose(via_hilbert[off], arazy_sqrt_symbol(f, grid).entries[off], atol=1e-12)

    def test_holder_diagonal_flagged(self) -> None:
        grid = np.linspace(0.0, 1.0, 5)
        M = holder_divided_symbol(FunctionTable(grid, np.sqrt(grid)), 0.5, 0.5, grid)

        assert M.degenerate is not None
        assert np.all(np.diag(M.degenerate))
        assert np.all(np.diag(M.entries) == 0.0)
        assert M.provenance.params["holder"] == pytest.approx(1.0)


class TestFunctionTable:
    """Tests for FunctionTable."""

    def test_load_pairs(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "f.json"
            path.write_text(json.dumps([[0.0, 0.0], [1.0, 2.0], [3.0, 2.5]]))
            f = FunctionTable.load(path)

        assert f.to_pairs() == [[0.0, 0.0], [1.0, 2.0], [3.0, 2.5]]
        assert f(0.5) == pytest.approx(1.0)

    def test_rejects_unsorted(self) -> None:
        with pytest.raises(DimensionError, match="strictly increasing"):
            FunctionTable.from_pairs([[0.0, 0.0], [0.0, 1.0]])

    def test_rejects_single_pair(self) -> None:
        with pytest.raises(DimensionError, match="two"):
            FunctionTable.from_pairs([[0.0, 0.0]])


class TestOtherSymbols:
    """Tests for one-sided, arcsin and triangular symbols."""

    def test_one_sided_bounded(self) -> None:
        rng = np.random.default_rng(11)
        u, w = random_family(4, 2, rng), random_family(4, 2, rng)

        for side in ("row", "column"):
            assert one_sided_symbol(u, w, side).sup <= 1.0 + 1e-12

    def test_one_sided_rejects_side(self) -> None:
        F = random_family(2, 1, np.random.default_rng(12))

        with pytest.raises(ValueError, match="side"):
            one_sided_symbol(F, F, "diagonal")

    def test_arcsin_of_equal_families(self) -> None:
        F = random_family(4, 2, np.random.default_rng(13), real=True)
        off = ~np.eye(4, dtype=bool)

        np.testing.assert_allclose(arcsin_symbol(F, F).entries[off], np.pi / 2, atol=1e-7)

    def test_arcsin_needs_real(self) -> None:
        F = random_family(3, 2, np.random.default_rng(14))

        with pytest.raises(PreconditionError, match="real"):
            arcsin_symbol(F, F)

    def test_classical_triangular(self) -> None:
        M = triangular_symbol(TriangularData((0, 1, 2)))
        expected = np.array([[1.0, -1.0, -1.0], [1.0, 1.0, -1.0], [1.0, 1.0, 1.0]])

        np.testing.assert_array_equal(M.entries.real, expected)

    def test_constant_map_below_grid(self) -> None:
        M = triangular_symbol(TriangularData((-1, -1, -1, -1)))

        np.testing.assert_array_equal(M.entries, np.ones((4, 4)))

    def test_gh_representation(self) -> None:
        data = TriangularData(tuple(int(v) for v in np.random.default_rng(15).integers(-1, 6, size=5)))
        u, up, w, wp = triangular_gh_families(data)
        j = np.arange(5)[:, None]
        away = j != np.asarray(data.a)[None, :]

        represented = gh_symbol(u, up, w, wp).entries

        np.testing.assert_allclose(represented[away], triangular_symbol(data).entries[away], atol=1e-12)

    def test_triangular_map_must_be_total(self) -> None:
        with pytest.raises(DimensionError, match="every grid point"):
            TriangularData((0, 1), grid=(0, 1, 2))


class TestMarcinkiewicz:
    """Tests for the layer-cake decomposition."""

    def test_constant_symbol(self) -> None:
        dec = marcinkiewicz_decompose(np.ones((3, 3)))

        assert dec.terms == []
        assert dec.identity_weight == pytest.approx(1.0)

    def test_hand_computed_row(self) -> None:
        R = np.zeros((4, 4))
        R[0] = [0.0, 1.0, 1.0, 0.0]

        dec = marcinkiewicz_decompose(R)

        assert [(t.row, t.threshold, t.weight) for t in dec.terms] == [(0, 0, -1.0), (0, 2, 1.0)]
        np.testing.assert_allclose(dec.reconstruct(), R, atol=1e-12)

    def test_random_rows_reconstruct(self) -> None:
        M = build_symbol("marcinkiewicz", {}, 9, np.random.default_rng(16))
        dec = marcinkiewicz_decompose(M)
        R = M.entries.real

        assert np.max(np.abs(dec.reconstruct() - R)) <= 1e-9
        for j in range(9):
            bound = np.sum(np.abs(np.diff(R[j]))) + abs(R[j, -1])
            assert dec.weight_sum(j) + abs(dec.offsets[j]) <= bound + 1e-12

    def test_variation_bound_recorded(self) -> None:
        M = marcinkiewicz_symbol(np.array([[0.0, 1.0], [1.0, 1.0]]))

        assert M.provenance.params["variation_bound"] == pytest.approx(2.0)

    def test_rejects_complex_rows(self) -> None:
        with pytest.raises(DecompositionError, match="real"):
            marcinkiewicz_decompose(np.array([[1j, 0.0], [0.0, 1.0]]))

    def test_rejects_non_finite(self) -> None:
        with pytest.raises(DecompositionError, match="non-finite"):
            marcinkiewicz_decompose(np.array([[np.inf, 0.0], [0.0, 1.0]]))

    def test_dyadic_variation_of_constant(self) -> None:
        assert dyadic_variation(np.ones((4, 4))) == pytest.approx(1.0)

    def test_dyadic_variation_sees_jumps(self) -> None:
        M = np.ones((4, 4))
        M[3, 1] = 0.0  # walking down from row 3 over 2 <= |m| < 4 now sees a jump

        assert dyadic_variation(custom_symbol(M)) > 1.0


class TestDyadicBlocks:
    """Tests for dyadic blocks."""

    def test_integer_grid(self) -> None:
        blocks = dyadic_blocks(np.arange(8.0))
        j, k = np.indices((8, 8))
        gap = np.abs(j - k)

        assert blocks.scales == [0, 1, 2]
        np.testing.assert_array_equal(blocks.masks[0], gap == 1)
        np.testing.assert_array_equal(blocks.masks[1], (gap == 2) | (gap == 3))
        np.testing.assert_array_equal(blocks.union(), gap > 0)

    def test_overlapping_custom_blocks(self) -> None:
        mask = np.ones((2, 2), dtype=bool)

        with pytest.raises(PartitionError, match="overlaps"):
            DyadicBlocks.custom([0.0, 1.0], {0: mask, 1: mask})

    def test_single_point(self) -> None:
        blocks = dyadic_blocks([0.0])

        assert blocks.scales == []
        assert block_square_function(np.ones((1, 1)), blocks).is_zero()

    def test_assemble_then_restrict(self) -> None:
        rng = np.random.default_rng(17)
        blocks = dyadic_blocks(np.arange(6.0))
        parts = {k: rng.standard_normal((6, 6)) for k in blocks.nonempty()}

        M = assemble_from_blocks(blocks, parts)

        for k, Mk in parts.items():
            np.testing.assert_array_equal(
                restrict_to_block(M, blocks, k).entries, np.where(blocks.masks[k], Mk, 0.0)
            )

    def test_assemble_ones_is_annulus_indicator(self) -> None:
        blocks = dyadic_blocks(np.arange(5.0))

        M = assemble_from_blocks(blocks, {k: np.ones((5, 5)) for k in blocks.nonempty()})

        np.testing.assert_array_equal(M.entries.real, blocks.union().astype(float))

    def test_assemble_missing_block(self) -> None:
        blocks = dyadic_blocks(np.arange(4.0))

        with pytest.raises(PartitionError, match="no symbol"):
            assemble_from_blocks(blocks, {0: np.ones((4, 4))})

    def test_restrict_unknown_block(self) -> None:
        blocks = dyadic_blocks(np.arange(4.0))

        with pytest.raises(PartitionError, match="unknown block"):
            restrict_to_block(custom_symbol(np.ones((4, 4))), blocks, 7)

    def test_square_function_at_two(self) -> None:
        rng = np.random.default_rng(18)
        x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        blocks = dyadic_blocks(np.arange(6.0))

        rc = rc_norm(block_square_function(x, blocks), 2.0)

        assert rc == pytest.approx(np.linalg.norm(np.where(blocks.union(), x, 0.0)), rel=1e-10)

    def test_sup_distances_on_plane(self) -> None:
        D = sup_distances(np.array([[0.0, 0.0], [1.0, 3.0]]))

        assert D[0, 1] == 3.0


class TestMikhlin:
    """Tests for imaginary powers and the discrete Mikhlin condition."""

    def test_constant_symbol(self) -> None:
        assert mikhlin_condition(np.full((5, 5), 2.0), [5], 0.25) == pytest.approx(2.0)

    def test_imaginary_power_modulus(self) -> None:
        M = imaginary_power_symbol(uniform_grid([6], 0.2), 1.0)

        np.testing.assert_allclose(np.abs(M.entries), 1.0, atol=1e-12)
        assert np.all(np.diag(M.entries) == 1.0)
        assert np.isfinite(mikhlin_condition(M, [6], 0.2))

    def test_grid_too_coarse(self) -> None:
        with pytest.raises(ResolutionError, match="too coarse"):
            mikhlin_condition(np.ones((3, 3)), [3], 1.0, order=3)

    def test_shape_mismatch(self) -> None:
        with pytest.raises(DimensionError, match="grid"):
            mikhlin_condition(np.ones((4, 4)), [5], 1.0)

    def test_uniform_grid_order(self) -> None:
        pts = uniform_grid([2, 3], 0.5)

        assert pts.shape == (6, 2)
        np.testing.assert_array_equal(pts[1], [0.0, 0.5])


class TestBuildSymbol:
    """Tests for build_symbol."""

    @pytest.mark.parametrize("tag", CONSTRUCTIONS)
    def test_every_construction(self, tag: str) -> None:
        M = build_symbol(tag, {}, 5, np.random.default_rng(19))

        assert M.size == 5
        assert M.tag == tag

    def test_seeded(self) -> None:
        a = build_symbol("gh", {"d": 3}, 4, np.random.default_rng(20))
        b = build_symbol("gh", {"d": 3}, 4, np.random.default_rng(20))

        np.testing.assert_array_equal(a.entries, b.entries)

    def test_unknown_construction(self) -> None:
        with pytest.raises(UnknownConstructionError, match="unknown construction"):
            build_symbol("fourier", {}, 3, np.random.default_rng(0))
