class Bunch(dict):
    """
    `Bunch` is a dictionary that supports attribute-style access.
    It is used for function statics (see `static_vars`) and for run metadata,
    so that `meta.scheme` and `meta["scheme"]` are the same thing.
    """

    def __init__(self, **kw):
        dict.__init__(self, kw)
        self.__dict__ = self

    def __str__(self):
        state = ["%s=%r" % (attribute, value)
                 for (attribute, value)
                 in sorted(self.__dict__.items())]
        return '\n'.join(state)


def static_vars(**kwargs):
    """
    Attach a `statics` Bunch to the decorated function.

    The solvers use it for per-step invariant data (banded matrices, wavenumbers)::

        @static_vars(cache=dict())
        def _bands(n, dx):
            statics = _bands.statics
            ...
    """
    def decorate(func):
        statics = Bunch(**kwargs)
        setattr(func, "statics", statics)
        return func

    return decorate


def clear_statics(func):
    """Empty every dict held in the statics of `func` (caches grow with each new key)."""
    for value in func.statics.values():
        if isinstance(value, dict):
            value.clear()
