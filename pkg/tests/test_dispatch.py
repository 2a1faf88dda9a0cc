from collections.abc import Callable

import numpy as np
import pytest
from mvprolate.dispatch import AmbiguityError, operand_dispatch
from mvprolate.linalg import BlockMat, sym_eig


# --- Hierarchy Setup ---
class Operand:
    pass


class Row(Operand):
    pass


class UnitRow(Row):
    pass


# --- Dispatcher setup ---
@operand_dispatch
def kind(x, scale=1):
    return "generic" * scale


@kind.register
def _(x: Operand, scale=1):
    return "operand"


@kind.register
def _(x: Row, scale=1):
    return "row"


@kind.register
def _(x: Callable, scale=1):
    return "callable"


# --- Test Cases ---


def test_hierarchical_dispatch():
    """The closest type in the MRO wins."""
    assert kind(Row()) == "row"
    assert kind(UnitRow()) == "row"
    assert kind(Operand()) == "operand"


def test_fallback_and_extra_arguments():
    """Unregistered operands fall back; extra arguments pass through."""
    assert kind(3) == "generic"
    assert kind(3, scale=2) == "genericgeneric"


def test_abc_ranks_last():
    """An ABC match is used only when no class in the MRO matches."""
    assert kind(lambda t: t) == "callable"

    class CallableRow(Row):
        def __call__(self):
            return None

    assert kind(CallableRow()) == "row"


def test_ambiguity_raises():
    """Registering the same operand type twice raises AmbiguityError."""

    @operand_dispatch
    def conflict(x):
        pass

    @conflict.register
    def _(x: int):
        return 1

    with pytest.raises(AmbiguityError, match="already has an implementation"):

        @conflict.register
        def _(x: int):
            return 2


def test_unannotated_registration_rejected():
    """The operand type comes from the first annotation."""

    @operand_dispatch
    def f(x):
        pass

    with pytest.raises(TypeError, match="annotated"):

        @f.register
        def _(x):
            return 0


def test_isolation():
    """Different dispatchers don't share registries."""

    @operand_dispatch
    def func_a(x):
        return None

    @operand_dispatch
    def func_b(x):
        return None

    @func_a.register
    def _(x: int):
        return "a"

    assert func_a(1) == "a"
    assert func_b(1) is None


def test_sym_eig_dispatches_on_operand():
    """sym_eig accepts ndarrays and BlockMats alike and rejects other operands."""
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    from_array = sym_eig(a)
    from_blocks = sym_eig(BlockMat(a))
    assert np.allclose(from_array.values, [1.0, 3.0])
    assert np.allclose(from_array.values, from_blocks.values)

    with pytest.raises(TypeError, match="does not accept"):
        sym_eig([[1.0]])
