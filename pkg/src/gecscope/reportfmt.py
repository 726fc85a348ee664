"""Display formatting shared by report emitters: 3-decimal half-up rounding."""

from decimal import Decimal, ROUND_HALF_UP

DISPLAY_DECIMALS = 3


def round_display(value: float, decimals: int = DISPLAY_DECIMALS) -> Decimal:
    """Half-up decimal rounding on the shortest repr of the float."""
    quantum = Decimal(1).scaleb(-decimals)
    return Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)


def format_display(value: float, decimals: int = DISPLAY_DECIMALS) -> str:
    return f"{round_display(value, decimals):.{decimals}f}"
