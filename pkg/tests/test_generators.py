import numpy as np
import pytest

from dbmat.debranges import K0Operator, char_fn
from dbmat.generators import MAX_TRIES, SamplingError, gen_k0, gen_rational


def test_k0_deterministic():
    a, b = gen_k0(7, 4, 1), gen_k0(7, 4, 1)
    assert np.array_equal(a.T, b.T) and np.array_equal(a.U, b.U)
    assert not np.array_equal(a.T, gen_k0(8, 4, 1).T)


@pytest.mark.parametrize("seed", range(10))
def test_k0_conditions(seed):
    op = gen_k0(seed, 4, 1)
    assert isinstance(op, K0Operator)
    T = op.T
    assert not np.allclose(T, T.conj().T)
    H = (T - T.conj().T) / 1j
    ev = np.linalg.eigvalsh((H + H.conj().T) / 2)
    assert np.sum(ev > 1e-9) == 1 and np.sum(ev < -1e-9) == 1
    assert np.abs(np.linalg.eigvals(T).imag).min() > 1e-9
    char_fn(op)


def test_k0_size_check():
    with pytest.raises(ValueError):
        gen_k0(0, 1, 1)


def test_rational_deterministic_and_valid():
    F = gen_rational(3)
    assert F == gen_rational(3)
    assert F.rows <= 3 and not F.det().is_zero()
    assert len(F.poles()) <= 6
    assert abs(np.linalg.det(F.to_float().eval(0))) > 0


def test_sampling_error_type():
    assert issubclass(SamplingError, RuntimeError) or issubclass(SamplingError, ValueError)
    assert MAX_TRIES == 1000
