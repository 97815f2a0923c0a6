"""Shared exception types."""


class SizeGuardError(RuntimeError):
    """A computation was refused because a size guard was exceeded.

    Guards keep the desk-scale enumeration and search routines from being
    launched on inputs they cannot finish.  The message names the offending
    parameter.
    """
