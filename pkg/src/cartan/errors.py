"""Exception types shared across the package."""


class CartanError(Exception):
    """Base class for all domain errors raised by this package."""


class ExponentOverflow(CartanError):
    """An intermediate polynomial exceeded the configured degree bound."""


class NonPolynomial(CartanError):
    """A purely polynomial expression was required but a primitive call was found."""


class NotDivisible(CartanError):
    """Factoring out a generator failed: the expression does not vanish on its zero set."""


class BadRadii(CartanError):
    """Bump-function radii must satisfy 0 < r_in < r_out."""


class UnknownPrimitive(CartanError):
    """A primitive name is not registered and belongs to no built-in family."""


class RingMismatch(CartanError):
    """Operands live over different ring presentations."""


class NotTangent(CartanError):
    """A vector field does not preserve the ideal.

    Attributes:
        generator: the offending ideal generator
        reduction: its image's nonzero normal form modulo the ideal
    """

    def __init__(self, generator, reduction):
        self.generator = generator
        self.reduction = reduction
        super().__init__(f"field image of {generator!r} reduces to {reduction!r} != 0")


class IdealMismatch(CartanError):
    """Coset operands belong to different ideals."""


class WrongIdeal(CartanError):
    """An operation specific to one ideal was applied to a different one."""


class NotRelated(CartanError):
    """The two derivations are not related by the given ring map."""


class Incompatible(CartanError):
    """Local data disagrees on an overlap.

    Attributes:
        pair: names (or indices) of the two incompatible pieces
        witness: a point of the overlap where they differ, when one was found
    """

    def __init__(self, pair, witness=None):
        self.pair = pair
        self.witness = witness
        msg = f"local data disagrees on overlap of {pair[0]!r} and {pair[1]!r}"
        if witness is not None:
            msg += f" (witness point {witness})"
        super().__init__(msg)


class IncompatibleFamily(CartanError):
    """A derivation family fails the restriction-square precondition."""


class ParseError(CartanError):
    """Input text does not match the grammar.

    `position` is the 0-based offset at which parsing failed.
    """

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (column {position})")


class UnknownIdentifier(ParseError):
    """An identifier is neither a declared variable nor a registered primitive."""
