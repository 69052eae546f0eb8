"""Exception and warning types shared across the package."""


class InvalidInputError(ValueError):
    """An operation received malformed, missing or non-finite inputs."""


class DomainError(ValueError):
    """Inputs left the mathematical domain of a rule (e.g. a denominator went non-positive)."""


class FitError(RuntimeError):
    """A least-squares fit could not be carried out (rank deficiency, too few levels)."""


class FittedDomainWarning(UserWarning):
    """Inputs lie outside the range a rule was fitted on; the raw value is still returned."""


class DegenerateFeatureWarning(UserWarning):
    """A column was constant when normalization stats were fitted; its scale defaults to 1."""
