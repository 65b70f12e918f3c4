import numpy as np
import pytest

from gaussflat.corpus import corpus, corpus_by_name, cylindrical, random_cylindrical_fields
from gaussflat.field import jet2_at
from gaussflat.verify import SUITES, run_suite


def test_corpus_names_and_excluded_sets():
    names = [f.name for f in corpus()]
    assert "example-1.1(a=0.5,c=1)" in names
    assert any(n.startswith("affine(b=") for n in names)
    c = corpus_by_name("cone(a=0.5)")
    assert len(c.excluded) == 1 and c.excluded[0].basis.shape[0] == 0
    np.testing.assert_array_equal(c.excluded[0].point, [0, 0])
    with pytest.raises(KeyError):
        corpus_by_name("nope")


def test_random_cylindrical_fields_are_convex_developable_spacelike():
    rng = np.random.default_rng(0)
    for f in random_cylindrical_fields(12, seed=5):
        for x in rng.uniform(-30, 30, (10, f.dim)):
            _, g, h = jet2_at(f, x)
            lam = np.linalg.eigvalsh(h)
            assert lam[0] >= -1e-12
            assert abs(np.prod(lam)) <= 1e-12
            assert np.linalg.norm(g) < 1


def test_cylindrical_rejects_unknown_profile():
    with pytest.raises(ValueError):
        cylindrical([1, 0], profile="cubic")


@pytest.mark.parametrize("suite", SUITES)
def test_suites_pass_at_small_size(suite):
    trials = {"euclid-identity": 9, "lemmas": 1, "cone-formulas": 5, "fd-oracle": 3}[suite]
    res = run_suite(suite, trials=trials, seed=0)
    assert res.passed, res.summary


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("bogus")
