"""Exception types. Each carries a stable ``code`` used by the command line."""


class FiscalIPWError(Exception):
    code = "E_INTERNAL"


class DataNotFoundError(FiscalIPWError, FileNotFoundError):
    code = "E_DATA_NOT_FOUND"


class DataError(FiscalIPWError, ValueError):
    """Invalid input table. ``row`` is the 1-based data row, ``column`` the header name."""

    code = "E_DATA_INVALID"

    def __init__(self, message, row=None, column=None):
        if row is not None or column is not None:
            where = ", ".join(str(v) for v in (row, column) if v is not None)
            message = f"{message} at ({where})"
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientRowsError(FiscalIPWError, ValueError):
    code = "E_INSUFFICIENT_ROWS"


class RankDeficiencyError(FiscalIPWError, ValueError):
    code = "E_RANK_DEFICIENT"


class SeparationError(FiscalIPWError, ValueError):
    code = "E_SEPARATION"


class ConvergenceError(FiscalIPWError, RuntimeError):
    code = "E_NONCONVERGENCE"


class EmptyCellError(FiscalIPWError, ValueError):
    code = "E_EMPTY_CELL"


class SpecError(FiscalIPWError, ValueError):
    code = "E_BAD_SPEC"


class ConfigError(FiscalIPWError, ValueError):
    code = "E_CONFIG"
