import math

import numpy as np
import pytest

from slowdiffeo.psi import InadmissiblePsi, PsiSpec, psi_eval, psi_validate


def test_power_eval():
    assert psi_eval(PsiSpec("power", 0.5), 4) == 2.0


def test_log_families():
    assert psi_eval(PsiSpec("log"), 1.0) == pytest.approx(math.log(2.0))
    assert psi_eval(PsiSpec("loglog"), 10.0) == pytest.approx(math.log(1 + math.log(11.0)))


@pytest.mark.parametrize("beta", [1.0, 1.5])
def test_power_not_sublinear(beta):
    rep = psi_validate(PsiSpec("power", beta))
    assert not rep.admissible and "o(x)" in rep.violated
    with pytest.raises(InadmissiblePsi, match="o\\(x\\) violated"):
        psi_validate(PsiSpec("power", beta), strict=True)


def test_power_nonpositive_exponent():
    assert not psi_validate(PsiSpec("power", 0.0)).admissible


def test_table_decreasing_rejected():
    psi = PsiSpec("table", table=((1, 3), (2, 2), (4, 1)))
    with pytest.raises(InadmissiblePsi, match="increasing"):
        psi_validate(psi, strict=True)


def test_table_linear_tail_rejected():
    psi = PsiSpec("table", table=((1, 1), (2, 2), (4, 4), (8, 8)))
    assert "o(x)" in psi_validate(psi).violated


def test_table_interpolation():
    psi = PsiSpec("table", table=((1, 1), (10, 4), (100, 9)))
    assert psi_validate(psi).admissible
    assert psi_eval(psi, 5.5) == pytest.approx(2.5)


def test_parse_roundtrip():
    for text in ("power:0.5", "log", "loglog"):
        psi = PsiSpec.parse(text)
        assert PsiSpec.parse(psi.to_dict()) == psi
        assert psi.label() == text


def test_eval_domain():
    with pytest.raises(ValueError):
        psi_eval(PsiSpec("log"), 0.5)
    v = psi_eval(PsiSpec("power", 0.3), np.array([1.0, 8.0]))
    assert v.shape == (2,)
