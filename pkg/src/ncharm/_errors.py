from __future__ import annotations


class Refusal(ValueError):
    """A computation declined because its inputs fall outside the resolvable regime.

    ``details`` carries whatever the caller might still want to report, e.g. the
    bound that would have been certified or the node count that would be needed.
    """

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details
