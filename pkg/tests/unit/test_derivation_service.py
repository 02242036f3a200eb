import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from services.completion_service import CompletionComponent, CompletionElement
from services.derivation_service import DerivationSpec
from services.lie_service import BasisIndex, Window
from shared.exceptions import InputError, MissingImage, NotADerivation, TruncationTooShallow

inner_terms = st.lists(
    st.tuples(st.integers(-2, 2), st.integers(0, 3), st.fractions(-4, 4, max_denominator=3)),
    min_size=0, max_size=5,
)
phi_values = st.fractions(-5, 5, max_denominator=5)


def exact(services, x):
    return CompletionElement.from_element(x)


def symbolic(services, y, *phi):
    return DerivationSpec.symbolic(exact(services, y), services.derivations.additive_map(phi or (0,)))


class TestScalarAndInnerDerivations:

    def test_d_phi(self, z):
        phi = z.derivations.additive_map([5])
        assert z.derivations.apply_D_phi(phi, z.lie.L(3, 2)) == z.lie.L(3, 2, 15)
        assert not z.derivations.apply_D_phi(phi, z.lie.L(0, 4))

    def test_d_phi0_is_embed(self, spec2):
        phi0 = spec2.derivations.phi0()
        for alpha in spec2.lattice.degrees(2):
            x = spec2.lie.L(alpha, 1)
            assert spec2.derivations.apply_D_phi(phi0, x) == x.scale(spec2.lattice.embed(alpha))

    def test_ad_l00(self, z):
        y = exact(z, z.lie.L(0, 0))
        for alpha in range(-2, 3):
            for i in range(3):
                image = z.derivations.apply_ad(y, z.lie.L(alpha, i))
                assert image.to_element() == z.lie.L(alpha, i, alpha) + z.lie.L(alpha, i + 1, i)

    def test_ad_zero(self, z):
        assert not z.derivations.apply_ad(CompletionElement(), z.lie.L(1, 1))

    def test_ad_truncated_keeps_order(self, z):
        component = CompletionComponent(tuple(z.lattice.scalars(1) for _ in range(4)), 3, False)
        y = CompletionElement({z.lattice.element(1): component})
        assert z.derivations.apply_ad(y, z.lie.L(2, 1)).valid_order == 3

    def test_additive_map_arity(self, spec2):
        with pytest.raises(InputError):
            spec2.derivations.additive_map([1])


class TestLeibniz:

    def test_inner_derivation(self, z):
        D = symbolic(z, z.lie.L(1, 0))
        assert z.derivations.leibniz_check(D, Window(3, 3)).is_zero

    def test_scalar_derivation(self, sym2):
        D = DerivationSpec.symbolic(CompletionElement(), sym2.derivations.additive_map(['1/2', 'g1']))
        assert sym2.derivations.leibniz_check(D, Window(2, 2)).is_zero

    def test_table_of_a_derivation(self, z):
        D = symbolic(z, z.lie.L(1, 0) + z.lie.L(-1, 2, 3), 2)
        table = z.derivations.to_table(D, Window(2, 2))
        assert z.derivations.leibniz_check(table, Window(2, 2)).is_zero

    def test_corrupted_table(self, z):
        window = Window(2, 2)
        table = z.derivations.to_table(symbolic(z, z.lie.L(1, 0), 1), window)
        target = BasisIndex(z.lattice.element(1), 1)
        table.images[target] = table.images[target] + exact(z, z.lie.L(0, 0))
        summary = z.derivations.leibniz_check(table, window)
        assert not summary.is_zero
        assert any(target in pair for pair in summary.failing_labels)

    def test_missing_image(self, z):
        table = DerivationSpec.table({BasisIndex(z.lattice.element(1), 0): CompletionElement()})
        with pytest.raises(MissingImage):
            z.derivations.evaluate(table, z.lie.L(0, 0))

    def test_table_rejects_high_levels(self, z):
        with pytest.raises(InputError):
            DerivationSpec.table({BasisIndex(z.lattice.element(1), 2): CompletionElement()})

    def test_table_extends_to_higher_levels(self, z):
        D = symbolic(z, z.lie.L(2, 1) - z.lie.L(0, 0), '3/2')
        table = z.derivations.to_table(D, Window(3, 1))
        for i in range(2, 5):
            x = z.lie.L(1, i)
            assert z.derivations.evaluate(table, x) == z.derivations.evaluate(D, x)


class TestDecomposition:

    def test_inner_by_l10(self, z):
        D = symbolic(z, z.lie.L(1, 0, -1))
        result = z.derivations.decompose_derivation(D, Window(2, 2))
        assert result.y == exact(z, z.lie.L(1, 0, -1))
        assert result.phi.is_zero
        assert not result.c
        assert result.residual.is_zero
        assert result.y_in_W

    def test_scalar_only(self, z):
        D = symbolic(z, z.lie.L(0, 0, 0), 3)
        result = z.derivations.decompose_derivation(D, Window(2, 2))
        assert not result.y
        assert result.phi.values == (z.lattice.scalars(3),)
        assert result.residual.is_zero

    def test_central_correction(self, z):
        D = DerivationSpec.symbolic(exact(z, z.lie.L(0, 0)), z.derivations.phi0().scale(-1))
        result = z.derivations.decompose_derivation(D, Window(2, 2))
        assert result.c == z.lattice.scalars(1)
        assert result.y == exact(z, z.lie.L(0, 0))
        assert result.phi == z.derivations.phi0().scale(-1)
        assert result.residual.is_zero

    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(terms=inner_terms, value=phi_values)
    def test_round_trip(self, z, terms, value):
        scalars = z.lattice.scalars
        y = z.lie.L(0, 0, 0)
        for degree, level, coeff in terms:
            y = y + z.lie.L(degree, level, scalars(str(coeff)))
        phi = z.derivations.additive_map([scalars(str(value))])
        D = DerivationSpec.symbolic(exact(z, y), phi)

        result = z.derivations.decompose_derivation(D, Window(2, 3))
        assert result.residual.is_zero
        assert result.phi == phi
        assert result.y_in_W
        assert result.y == exact(z, y)

    def test_round_trip_rank_two(self, spec2):
        L = spec2.lie.L
        y = L((1, 0), 1) + L((0, -1), 0, 2) + L((0, 0), 2)
        phi = spec2.derivations.additive_map(['1/3', -2])
        result = spec2.derivations.decompose_derivation(DerivationSpec.symbolic(exact(spec2, y), phi), Window(1, 2))
        assert result.residual.is_zero
        assert result.phi == phi
        assert result.y == exact(spec2, y)

    def test_from_table(self, z):
        D = symbolic(z, z.lie.L(1, 0) + z.lie.L(0, 2), 2)
        table = z.derivations.to_table(D, Window(2, 2))
        result = z.derivations.decompose_derivation(table, Window(2, 2))
        assert result.residual.is_zero
        assert result.y == exact(z, z.lie.L(1, 0) + z.lie.L(0, 2))

    def test_truncated_inner_part(self, z):
        component = CompletionComponent(tuple(z.lattice.scalars(1) for _ in range(6)), 5, False)
        D = DerivationSpec.symbolic(CompletionElement({z.lattice.element(1): component}), z.derivations.zero_map())
        result = z.derivations.decompose_derivation(D, Window(2, 2), order=4)
        assert result.residual.is_zero
        assert not result.y_in_W

    def test_truncation_too_shallow(self, z):
        component = CompletionComponent(tuple(z.lattice.scalars(1) for _ in range(3)), 2, False)
        D = DerivationSpec.symbolic(CompletionElement({z.lattice.element(1): component}), z.derivations.zero_map())
        with pytest.raises(TruncationTooShallow):
            z.derivations.decompose_derivation(D, Window(2, 2))

    def test_not_a_derivation(self, z):
        window = Window(2, 2)
        table = z.derivations.to_table(symbolic(z, z.lie.L(0, 0, 0)), window)
        index = BasisIndex(z.lattice.element(2), 0)
        table.images[index] = exact(z, z.lie.L(-1, 0))
        with pytest.raises(NotADerivation):
            z.derivations.decompose_derivation(table, window)


class TestDirectSum:

    def test_integers(self, z):
        report = z.derivations.direct_sum_check(Window(2, 2))
        assert report['direct']
        assert report['phi_forced_zero']

    def test_symbolic_rank_two(self, sym2):
        report = sym2.derivations.direct_sum_check(Window(1, 1))
        assert report['direct']
        assert report['kernel_dimension'] == 0
