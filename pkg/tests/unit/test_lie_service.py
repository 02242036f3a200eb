import pytest

from services.lie_service import BasisIndex, BracketRule, Element, WGAMMA, WGAMMA_HAT, WITT_TYPE, Window
from shared.exceptions import CentralTermPresent, EmptyComponent, InputError, LevelOutOfRange

RULES = [WGAMMA, WGAMMA_HAT, WITT_TYPE, BracketRule.subquotient(0, 2)]


class TestBracket:

    def test_wgamma_example(self, z):
        L = z.lie.L
        assert z.lie.bracket(L(1, 2), L(3, 1)) == L(4, 3, 2) - L(4, 4)

    def test_central_extension_example(self, z):
        L = z.lie.L
        result = z.lie.bracket(L(2, 0), L(-2, 0), WGAMMA_HAT)
        assert result == L(0, 0, -4) + z.lie.C('1/2')

    def test_no_central_term_off_level_zero(self, z):
        L = z.lie.L
        assert not z.lie.bracket(L(2, 1), L(-2, 0), WGAMMA_HAT).has_central

    def test_witt_type_lowers_level(self, z):
        L = z.lie.L
        assert z.lie.bracket(L(0, 0), L(1, 3), WITT_TYPE) == L(1, 3, -1) + L(1, 2, 3)

    def test_witt_type_drops_negative_levels(self, z):
        L = z.lie.L
        assert z.lie.bracket(L(1, 0), L(2, 0), WITT_TYPE) == L(3, 0, -1)

    def test_symbolic_rank_two(self, sym2):
        L, s = sym2.lie.L, sym2.lattice.scalars
        result = sym2.lie.bracket(L((1, 0), 0), L((0, 1), 1))
        assert result == L((1, 1), 1, s('g2 - g1')) + L((1, 1), 2, 1)

    @pytest.mark.parametrize('rule', RULES, ids=str)
    def test_antisymmetry(self, z, rule):
        L = z.lie.L
        x = L(1, 0) + L(-2, 1, 3)
        y = L(2, 2) - L(0, 1)
        assert z.lie.bracket(x, y, rule) == -z.lie.bracket(y, x, rule)
        assert not z.lie.bracket(x, x, rule)

    def test_central_term_rejected_outside_hat(self, z):
        with pytest.raises(CentralTermPresent):
            z.lie.bracket(z.lie.C(), z.lie.L(1, 0))

    def test_central_term_is_central(self, z):
        assert not z.lie.bracket(z.lie.C(), z.lie.L(1, 0), WGAMMA_HAT)

    def test_subquotient_rejects_outside_levels(self, z):
        with pytest.raises(LevelOutOfRange):
            z.lie.bracket(z.lie.L(1, 3), z.lie.L(0, 0), BracketRule.subquotient(0, 2))

    def test_subquotient_truncates(self, z):
        L = z.lie.L
        assert z.lie.bracket(L(1, 1), L(2, 1), BracketRule.subquotient(1, 2)) == L(3, 2)

    def test_ad_power(self, z):
        L = z.lie.L
        assert z.lie.ad_power(L(0, 0), L(2, 0), 3) == L(2, 0, 8)


class TestJacobi:

    @pytest.mark.parametrize('rule', RULES, ids=str)
    def test_integers_window(self, z, rule):
        summary = z.lie.jacobi_sweep(Window(3, 3), rule)
        assert summary.checked > 0
        assert summary.is_zero

    @pytest.mark.parametrize('rule', RULES, ids=str)
    def test_symbolic_rank_two_window(self, sym2, rule):
        assert sym2.lie.jacobi_sweep(Window(1, 2), rule).is_zero

    def test_virasoro_triple(self, z):
        L = z.lie.L
        assert not z.lie.jacobi_residual(L(1, 0), L(2, 0), L(-3, 0), WGAMMA_HAT)

    def test_repeated_argument(self, z):
        L = z.lie.L
        x, y = L(1, 2) + L(0, 1), L(-1, 0)
        assert not z.lie.jacobi_residual(x, x, y)

    @pytest.mark.slow
    def test_symbolic_rank_two_larger_window(self, sym2):
        assert sym2.lie.jacobi_sweep(Window(2, 1), WGAMMA_HAT).is_zero


class TestViews:

    def test_support_depth_and_length(self, z):
        L = z.lie.L
        x = L(1, 2) + L(1, 5, 3) + L(2, 0)
        one = z.lattice.element(1)
        assert x.support() == [one, z.lattice.element(2)]
        assert x.depth == 2
        assert x.length(one) == 4
        assert x.first_term(one) == L(1, 2)
        assert x.last_term(one) == L(1, 5, 3)

    def test_zero_element(self):
        zero = Element()
        assert zero.support() == []
        assert zero.depth == 0
        assert not zero

    def test_homogeneous_component_of_basis_element(self, z):
        x = z.lie.L(3, 2)
        assert x.homogeneous_component(z.lattice.element(3)) == x

    def test_empty_component(self, z):
        with pytest.raises(EmptyComponent):
            z.lie.L(1, 0).first_term(z.lattice.element(2))

    def test_element_views(self, z):
        L = z.lie.L
        views = z.lie.element_views(L(-1, 0) + L(2, 1) + L(2, 4))
        assert views['depth'] == 2
        assert [c['length'] for c in views['components']] == [1, 4]

    def test_sorted_terms_put_central_last(self, z):
        L = z.lie.L
        x = z.lie.C() + L(2, 0) + L(-1, 3) + L(-1, 1)
        order = [str(index) for index, _ in z.lie.sorted_terms(x)]
        assert order == ['L((-1),1)', 'L((-1),3)', 'L((2),0)', 'C']

    def test_zero_coefficients_are_dropped(self, z):
        L = z.lie.L
        assert not (L(1, 0) - L(1, 0))
        assert len(L(1, 0) + L(1, 0)) == 1


class TestRulesAndWindows:

    @pytest.mark.parametrize('text, expected', [
        ('wgamma', WGAMMA),
        ('WGammaHat', WGAMMA_HAT),
        ('witt', WITT_TYPE),
        ('subquotient:0,2', BracketRule.subquotient(0, 2)),
        ('subquotient(1,3)', BracketRule.subquotient(1, 3)),
    ])
    def test_parse(self, text, expected):
        assert BracketRule.parse(text) == expected

    def test_unknown_rule(self):
        with pytest.raises(InputError):
            BracketRule.parse('lie')

    def test_bad_subquotient(self):
        with pytest.raises(InputError):
            BracketRule.subquotient(3, 1)

    def test_bad_window(self):
        with pytest.raises(InputError):
            Window(0, 3)
        with pytest.raises(InputError):
            Window(2, -1)

    def test_window_basis(self, z):
        window = Window(2, 1)
        assert len(window.basis(z.lattice)) == 10
        assert window.contains(BasisIndex(z.lattice.element(-2), 1))
        assert not window.contains(BasisIndex(z.lattice.element(3), 0))
        assert window.grown(2, 1) == Window(4, 3)

    def test_negative_level(self, z):
        with pytest.raises(InputError):
            BasisIndex(z.lattice.element(1), -1)
