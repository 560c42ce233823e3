"""Exception hierarchy shared by every component."""


class StreamError(Exception):
    """Base class for errors raised while processing a stream.

    Batch operations attach the offending position as ``index`` and, where
    scores had already been produced, the completed prefix as
    ``partial_scores``. Pipelines record the failing stage in ``stage``.
    """

    index = None
    partial_scores = None
    stage = None

    def __str__(self):
        msg = super().__str__()
        where = []
        if self.stage is not None:
            where.append(f"stage {self.stage}")
        if self.index is not None:
            where.append(f"index {self.index}")
        if where:
            return f"[{', '.join(where)}] {msg}"
        return msg


class DimensionMismatch(StreamError, ValueError):
    pass


class NonFiniteInput(StreamError, ValueError):
    pass


class BadParameter(StreamError, ValueError):
    pass


class BadLabel(StreamError, ValueError):
    pass


class EmptyInput(StreamError, ValueError):
    pass


class MetricUndefined(StreamError):
    """Raised when AUROC is requested without both classes present."""


class RowParse(StreamError, ValueError):
    def __init__(self, line_no, reason):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class ConfigError(StreamError, ValueError):
    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
