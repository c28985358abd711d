"""Implementation helpers shared by the certificate and configuration classes."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, TypeVar

import attrs
import numpy as np

if TYPE_CHECKING:
    from IPython.lib.pretty import PrettyPrinter


_DecoratedClass = TypeVar("_DecoratedClass")


def implement_pretty_repr(
    decorated_class: type[_DecoratedClass],
) -> type[_DecoratedClass]:
    """Implement a pretty :code:`repr` in a class decorated by `attrs`.

    Array-valued fields are summarized by their shape, so that certificates holding
    thousands of enclosures stay readable in IPython.
    """
    if not attrs.has(decorated_class):
        msg = "Can only implement a pretty repr for a class created with attrs"
        raise TypeError(msg)

    def repr_pretty(self: Any, p: PrettyPrinter, cycle: bool) -> None:
        class_name = type(self).__name__
        if cycle:
            p.text(f"{class_name}(...)")
            return
        with p.group(indent=2, open=f"{class_name}("):
            for field in attrs.fields(type(self)):
                if not field.init or not field.repr:
                    continue
                value = getattr(self, field.name)
                p.breakable()
                p.text(f"{field.name}=")
                summary = summarize(value)
                if summary is None:
                    p.pretty(value)  # type: ignore[attr-defined]
                else:
                    p.text(summary)
                p.text(",")
        p.breakable()
        p.text(")")

    decorated_class._repr_pretty_ = repr_pretty  # type: ignore[attr-defined]
    return decorated_class  # type: ignore[return-value]


def summarize(value: Any) -> str | None:
    """Short text for numeric containers, `None` for everything else.

    >>> summarize(np.zeros((3, 4)))
    'array(shape=(3, 4))'
    >>> summarize(1.5e-10)
    '1.500000e-10'
    >>> summarize("text") is None
    True
    """
    if isinstance(value, float):
        return f"{value:.6e}"
    if isinstance(value, np.ndarray):
        if value.ndim == 0:
            return f"{value.item():.6e}"
        return f"array(shape={value.shape})"
    shape = getattr(value, "shape", None)
    if shape is not None and hasattr(value, "identical"):
        return repr(value)
    return None
