import numpy as np
import pytest

from qstein import kernels
from qstein.kernels import _fallback

try:
    from qstein.kernels import _core
except ImportError:          # extension not built
    _core = None

BACKENDS = [pytest.param(_fallback, id="python"),
            pytest.param(_core, id="compiled",
                         marks=pytest.mark.skipif(_core is None, reason="extension not built"))]


def _sorted_atoms(rng, k):
    v = np.sort(rng.normal(size=k))
    p = rng.random(k)
    return v, p / p.sum()


class TestMerge:
    @pytest.mark.parametrize("impl", BACKENDS)
    def test_chain_merge_keeps_first_value(self, impl):
        v = np.array([0.0, 1.0, 1.0 + 5e-13, 1.0 + 1e-12, 2.0])
        p = np.array([0.1, 0.2, 0.3, 0.1, 0.3])
        mv, mp = impl.merge_sorted_atoms(v, p, 1e-12)
        assert mv.tolist() == [0.0, 1.0, 2.0]
        assert np.allclose(mp, [0.1, 0.6, 0.3])

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_zero_mass_clusters_dropped(self, impl):
        mv, mp = impl.merge_sorted_atoms(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 1e-12)
        assert mv.tolist() == [1.0]

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_tiny_probabilities_keep_order(self, impl):
        # denormal masses must not disturb the merged values
        v = np.array([-3.0, -1.0, 2.0])
        p = np.array([5e-324, 1e-310, 1.0])
        mv, _ = impl.merge_sorted_atoms(v, p, 1e-12)
        assert np.all(np.diff(mv) > 0)


class TestConvolve:
    @pytest.mark.parametrize("impl", BACKENDS)
    def test_against_outer_sum(self, impl, rng):
        va, pa = _sorted_atoms(rng, 7)
        vb, pb = _sorted_atoms(rng, 5)
        v, p = impl.convolve_sorted(va, pa, vb, pb, 1e-12)
        brute = np.add.outer(va, vb).ravel()
        mass = np.outer(pa, pb).ravel()
        order = np.argsort(brute)
        assert np.allclose(v, brute[order])
        assert np.allclose(p, mass[order])

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_lattice_collapses(self, impl):
        v = np.array([0.0, 1.0])
        p = np.array([0.5, 0.5])
        cv, cp = v, p
        for _ in range(9):
            cv, cp = impl.convolve_sorted(cv, cp, v, p, 1e-12)
        assert cv.size == 11
        assert cp.sum() == pytest.approx(1.0)

    @pytest.mark.skipif(_core is None, reason="extension not built")
    def test_backends_agree(self, rng):
        va, pa = _sorted_atoms(rng, 40)
        vb, pb = _sorted_atoms(rng, 30)
        a = _core.convolve_sorted(va, pa, vb, pb, 1e-12)
        b = _fallback.convolve_sorted(va, pa, vb, pb, 1e-12)
        assert np.array_equal(a[0], b[0])
        assert np.allclose(a[1], b[1], rtol=1e-14, atol=0)


class TestGramSchmidt:
    @pytest.mark.parametrize("impl", BACKENDS)
    def test_orthonormal_and_zero_preserving(self, impl, rng):
        a = rng.normal(size=(3, 6)) + 1j * rng.normal(size=(3, 6))
        rows = np.vstack([a[0], a[1], a[0] + 2 * a[1], np.zeros(6), a[2]])
        q, keep = impl.gram_schmidt(np.ascontiguousarray(rows), 1e-9)
        assert keep.tolist() == [True, True, False, False, True]
        assert np.allclose(q[2], 0) and np.allclose(q[3], 0)
        kept = q[keep]
        assert np.allclose(kept @ kept.conj().T, np.eye(3), atol=1e-12)

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_span_preserved(self, impl, rng):
        rows = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        q, keep = impl.gram_schmidt(np.ascontiguousarray(rows), 1e-9)
        proj = q[keep].T @ q[keep].conj()
        assert np.allclose(proj @ rows.T, rows.T, atol=1e-11)

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_ill_conditioned_reorthogonalised(self, impl):
        eps = 1e-7
        rows = np.array([[1, eps, 0, 0], [1, 0, eps, 0], [1, 0, 0, eps]], dtype=complex)
        q, keep = impl.gram_schmidt(np.ascontiguousarray(rows), 1e-12)
        kept = q[keep]
        assert np.linalg.norm(kept @ kept.conj().T - np.eye(kept.shape[0])) < 1e-12

    @pytest.mark.skipif(_core is None, reason="extension not built")
    def test_backends_agree(self, rng):
        rows = np.ascontiguousarray(rng.normal(size=(6, 16)) + 1j * rng.normal(size=(6, 16)))
        qa, ka = _core.gram_schmidt(rows, 1e-9)
        qb, kb = _fallback.gram_schmidt(rows, 1e-9)
        assert np.array_equal(ka, kb)
        assert np.allclose(qa, qb, atol=1e-13)


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("flag, expect", [("1", "python"), ("0", None)])
def test_env_selects_fallback(flag, expect):
    import os
    import subprocess
    import sys
    env = dict(os.environ, QSTEIN_PURE_PYTHON=flag)
    out = subprocess.run([sys.executable, "-c", "import qstein.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    if expect is None:
        expect = "compiled" if _core is not None else "python"
    assert out == expect
