import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from services.automorphism_service import AutElement
from services.lie_service import BasisIndex, Element, Window
from shared.exceptions import CentralTermPresent, InputError, MissingImage

nonzero = st.fractions(-6, 6, max_denominator=4).filter(lambda q: q != 0)
sign = st.sampled_from([1, -1])


def integer_aut(z, tau, c):
    return AutElement(z.automorphisms.character([str(tau)]), z.lattice.scale_map(c, [[c]]))


class TestApply:

    def test_example(self, z):
        a = integer_aut(z, 3, -1)
        assert z.automorphisms.aut_apply(a, z.lie.L(1, 2)) == z.lie.L(-1, 2, -3)

    def test_identity(self, z):
        x = z.lie.L(1, 2) + z.lie.L(-3, 0, '1/2')
        assert z.automorphisms.aut_apply(z.automorphisms.identity(), x) == x

    def test_l00(self, z):
        a = integer_aut(z, 7, -1)
        assert z.automorphisms.aut_apply(a, z.lie.L(0, 0)) == z.lie.L(0, 0, -1)

    def test_symbolic_character(self, sym2):
        auts = sym2.automorphisms
        a = auts.character_only(auts.character(['g1', 2]))
        image = auts.aut_apply(a, sym2.lie.L((1, -1), 1))
        assert image == sym2.lie.L((1, -1), 1, sym2.lattice.scalars('g1/2'))

    def test_central_term(self, z):
        with pytest.raises(CentralTermPresent):
            z.automorphisms.aut_apply(z.automorphisms.identity(), z.lie.C())

    def test_character_validation(self, sym2):
        with pytest.raises(InputError):
            sym2.automorphisms.character([1])
        with pytest.raises(InputError):
            sym2.automorphisms.character([1, 0])

    def test_filtration_is_preserved(self, z):
        a = integer_aut(z, '2/3', -1)
        for text in ('L(1,2) + L(3,5)', 'L(0,0) - 4*L(2,1)', '[L(1,1), L(2,3)]'):
            x = z.expressions.eval_text(text)
            image = z.automorphisms.aut_apply(a, x)
            assert z.structure.filtration_level(image) == z.structure.filtration_level(x)


class TestGroupLaw:

    def test_compose_with_identity(self, z):
        a = integer_aut(z, 5, -1)
        identity = z.automorphisms.identity()
        assert z.automorphisms.aut_compose(a, identity) == a
        assert z.automorphisms.aut_compose(identity, a) == a

    def test_compose_example(self, z):
        composite = z.automorphisms.aut_compose(integer_aut(z, 2, -1), integer_aut(z, 5, -1))
        assert composite.c == z.lattice.scale_identity()
        assert composite.tau.values == (z.lattice.scalars('5/2'),)

    def test_semidirect_factors(self, z):
        auts = z.automorphisms
        tau, c = auts.character([3]), z.lattice.scale_map(-1, [[-1]])
        assert auts.aut_compose(auts.scale_only(c), auts.character_only(tau)) == AutElement(tau, c)
        twisted = auts.aut_compose(auts.character_only(tau), auts.scale_only(c))
        assert twisted == AutElement(auts.character(['1/3']), c)

    @settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(t1=nonzero, t2=nonzero, c1=sign, c2=sign)
    def test_functoriality(self, z, t1, t2, c1, c2):
        auts = z.automorphisms
        a1, a2 = integer_aut(z, t1, c1), integer_aut(z, t2, c2)
        composite = auts.aut_compose(a1, a2)
        for index in Window(2, 2).basis(z.lattice):
            x = z.lie.basis_element(index)
            assert auts.aut_apply(composite, x) == auts.aut_apply(a1, auts.aut_apply(a2, x))

    def test_functoriality_rank_two(self, sym2):
        auts, lattice = sym2.automorphisms, sym2.lattice
        a1 = AutElement(auts.character(['g2', -1]), lattice.scale_map(-1, [[-1, 0], [0, -1]]))
        a2 = auts.character_only(auts.character([3, 'g1 + g2']))
        composite = auts.aut_compose(a1, a2)
        for index in Window(1, 1).basis(lattice):
            x = sym2.lie.basis_element(index)
            assert auts.aut_apply(composite, x) == auts.aut_apply(a1, auts.aut_apply(a2, x))

    def test_invert(self, z):
        auts = z.automorphisms
        a = integer_aut(z, 4, -1)
        inverse = auts.aut_invert(a)
        assert inverse.c.value == z.lattice.scalars(-1)
        assert auts.is_identity(auts.aut_compose(a, inverse))
        assert auts.is_identity(auts.aut_compose(inverse, a))
        assert auts.aut_invert(inverse) == a

    def test_identity_inverse(self, spec2):
        identity = spec2.automorphisms.identity()
        assert spec2.automorphisms.aut_invert(identity) == identity


class TestVerification:

    @settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(tau=nonzero, c=sign)
    def test_random_integer_automorphisms(self, z, tau, c):
        assert z.automorphisms.aut_verify(integer_aut(z, tau, c), Window(3, 3)).is_zero

    @settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(t1=nonzero, t2=nonzero, c=sign, symbolic=st.booleans())
    def test_random_rank_two_automorphisms(self, sym2, t1, t2, c, symbolic):
        auts = sym2.automorphisms
        values = [f"{t1}*g1" if symbolic else str(t1), str(t2)]
        a = AutElement(auts.character(values), sym2.lattice.scale_map(c, [[c, 0], [0, c]]))
        assert auts.aut_verify(a, Window(1, 2)).is_zero

    def test_corrupted_exponent(self, z):
        auts = z.automorphisms
        a = integer_aut(z, 2, -1)

        def wrong_apply(aut, x):
            terms = {}
            for index, value in x.basic_terms():
                image = BasisIndex(z.lattice.scale_apply(aut.c, index.degree), index.level)
                terms[image] = value * aut.tau(index.degree) * aut.c.value ** (-index.level)
            return Element(terms)

        summary = auts.aut_verify(a, Window(1, 1), apply_fn=wrong_apply)
        assert not summary.is_zero
        x, y = z.lie.L(1, 0), z.lie.L(0, 1)
        assert wrong_apply(a, z.lie.bracket(x, y)) != z.lie.bracket(wrong_apply(a, x), wrong_apply(a, y))

    def test_identity_verifies(self, z):
        assert z.automorphisms.aut_verify(z.automorphisms.identity(), Window(2, 2)).is_zero


class TestRigidity:

    def test_fixing_generators_forces_identity(self, z):
        report = z.automorphisms.rigidity_check(Window(3, 3))
        assert report['fixes_generators']
        assert report['bracket_preserving'].is_zero
        assert report['identity']
        assert report['rigid']

    def test_extension_matches_automorphism(self, z):
        auts = z.automorphisms
        a = integer_aut(z, 3, -1)
        window = Window(2, 4)
        images = {BasisIndex(alpha, i): auts.aut_apply(a, z.lie.L(alpha, i))
                  for alpha in window.degrees(z.lattice) for i in (0, 1)}
        extended = auts.extend_from_generators(images, window)
        for index, image in extended.items():
            assert image == auts.aut_apply(a, z.lie.basis_element(index))

    def test_extension_needs_l00(self, z):
        with pytest.raises(MissingImage):
            z.automorphisms.extend_from_generators({}, Window(1, 2))


    def test_nontrivial_automorphism_is_not_a_counterexample(self, z):
        auts = z.automorphisms
        a = integer_aut(z, 3, -1)
        window = Window(2, 2)
        images = {BasisIndex(alpha, i): auts.aut_apply(a, z.lie.L(alpha, i))
                  for alpha in window.degrees(z.lattice) for i in (0, 1)}
        report = auts.rigidity_check(window, images)
        assert not report['fixes_generators']
        assert report['bracket_preserving'].is_zero
        assert not report['identity']
        assert report['rigid']

    def test_rescaled_generator_breaks_brackets(self, z):
        window = Window(1, 1)
        images = {BasisIndex(alpha, i): z.lie.L(alpha, i)
                  for alpha in window.degrees(z.lattice) for i in (0, 1)}
        images[BasisIndex(z.lattice.element(1), 0)] = z.lie.L(1, 0, 2)
        report = z.automorphisms.rigidity_check(window, images)
        assert not report['fixes_generators']
        assert not report['bracket_preserving'].is_zero
        pairs = [set(pair) for pair in report['bracket_preserving'].failing_labels]
        assert {BasisIndex(z.lattice.element(-1), 0), BasisIndex(z.lattice.element(1), 0)} in pairs
        assert not report['identity']
        assert report['rigid']
