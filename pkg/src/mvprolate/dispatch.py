from functools import wraps
from inspect import signature
from typing import Any, Callable, List, Tuple, Type


class AmbiguityError(TypeError):
    """Raised when two implementations accept the same operand type."""

    pass


class OperandDispatcher:
    """
    Dispatches on the type of the first argument (the operand).

    Candidates are ranked by MRO distance; an annotation that is not in the
    operand's MRO but still accepts it via `issubclass` (an ABC such as
    `collections.abc.Callable`) ranks last.
    """

    def __init__(self, default_func: Callable):
        self.default_func = default_func
        self.registry: List[Tuple[Type, Callable]] = []
        wraps(default_func)(self)

    def register(self, func: Callable) -> Callable:
        """Registers an implementation keyed by its first annotation."""
        params = list(signature(func, eval_str=True).parameters.values())

        if not params or params[0].annotation is params[0].empty:
            raise TypeError(
                f"{func.__name__} needs an annotated first parameter to be registered"
            )

        operand_type = params[0].annotation

        for registered, _ in self.registry:
            if registered is operand_type:
                raise AmbiguityError(
                    f"{self.default_func.__name__} already has an implementation "
                    f"for {operand_type.__name__}"
                )

        self.registry.append((operand_type, func))
        return func

    def resolve(self, operand: Any) -> Callable:
        operand_type = type(operand)
        best = None
        best_dist = float("inf")

        for target, func in self.registry:
            if not issubclass(operand_type, target):
                continue

            try:
                dist = operand_type.mro().index(target)
            except ValueError:
                dist = 1000  # ABC / Protocol acceptance

            if dist < best_dist:
                best, best_dist = func, dist

        return best if best is not None else self.default_func

    def __call__(self, operand: Any, *args: Any, **kwargs: Any) -> Any:
        return self.resolve(operand)(operand, *args, **kwargs)


def operand_dispatch(func: Callable) -> OperandDispatcher:
    """Decorator creating an isolated dispatcher with `func` as fallback."""
    return OperandDispatcher(func)
