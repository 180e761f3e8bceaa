"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument is outside its documented domain."""


class SignalDomainError(ValueError):
    """A signal-strength or shrinkage parameterization is undefined
    (e.g. the covariance change is as large as the nominal noise level)."""


class DegenerateDataError(RuntimeError):
    """A statistic cannot be formed because an empirical variance is zero."""


class EnumerationBudgetError(RuntimeError):
    """Exact sparse-eigenvalue enumeration would exceed the subset budget.

    The SDP relaxation (:mod:`covshift.sdp_relax`) handles these sizes in
    polynomial time.
    """


class NoiseWindowError(InvalidInputError):
    """The prefix/suffix window of a noise estimator does not fit in the
    sample. Scanning tests treat this as a skip signal."""


class UndecidableInputError(RuntimeError):
    """Every scan cell was skipped, so a test cannot reach a decision."""
