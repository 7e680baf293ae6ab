"""
Exceptions raised by corpkit.

Every error that can be traced back to user input derives from CorpkitError,
so front ends can catch a single type and report the message.
"""


class CorpkitError(Exception):
    """Base class of all corpkit errors."""


class LtlSyntaxError(CorpkitError, ValueError):

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class UnknownAtomError(CorpkitError, ValueError):

    def __init__(self, atom: str, position: int = -1):
        super().__init__(f'unknown atomic proposition "{atom}"' + (f' at position {position}' if position >= 0 else ''))
        self.atom = atom
        self.position = position


class AlphabetMismatchError(CorpkitError, ValueError):
    pass


class NameCollisionError(CorpkitError, ValueError):
    pass


class HoaFormatError(CorpkitError, ValueError):
    pass


class SystemFormatError(CorpkitError, ValueError):
    pass


class InputEnabledError(SystemFormatError):

    def __init__(self, state: str, letter):
        names = ','.join(sorted(letter))
        super().__init__(f'state "{state}" has no successor for input letter {{{names}}}')
        self.state = state
        self.letter = frozenset(letter)


class InvalidTraceError(CorpkitError, ValueError):
    pass


class SynthesisTimeout(CorpkitError):
    pass
