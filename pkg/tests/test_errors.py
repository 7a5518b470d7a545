import pytest

from povm_prep.errors import (
    ConfigError,
    Diagnostic,
    DomainError,
    InvalidSet,
    NumericalError,
    OutOfWindow,
    PovmPrepError,
    SingularMatrix,
    Unattainable,
    all_error_classes,
)


def test_codes_are_unique():
    codes = [c.code for c in all_error_classes()]
    assert len(codes) == len(set(codes))
    diag = [d.value for d in Diagnostic]
    assert len(diag) == len(set(diag))
    # a warning code never shadows an error code
    assert not set(codes) & set(diag)


def test_exit_statuses():
    assert ConfigError.exit_status == 1
    assert Unattainable.exit_status == OutOfWindow.exit_status == InvalidSet.exit_status == 2
    assert SingularMatrix.exit_status == 3
    for cls in all_error_classes():
        if issubclass(cls, DomainError):
            assert cls.exit_status == 2
        elif issubclass(cls, NumericalError):
            assert cls.exit_status == 3
        assert issubclass(cls, PovmPrepError)


def test_error_payloads():
    e = Unattainable("x", index=2, cos_value=1.2)
    assert (e.index, e.cos_value) == (2, 1.2)
    assert OutOfWindow("y", condition="0 < theta_b1 < pi").condition == "0 < theta_b1 < pi"
    with pytest.raises(ValueError):
        raise ConfigError("config errors are also ValueErrors")
