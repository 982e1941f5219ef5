from enum import Enum
from typing import Optional
from lmft.utils.errors import ValidationError

RESET = "\033[0m"


class Palette(Enum):
    VIRIDIS = "viridis"
    GREYS = "greys"
    PLAIN = "plain"

    @staticmethod
    def try_parse(value) -> "Palette":
        if isinstance(value, Palette):
            return value
        match str(value).lower():
            case "viridis":
                return Palette.VIRIDIS
            case "greys" | "grays":
                return Palette.GREYS
            case "plain" | "none":
                return Palette.PLAIN
            case _:
                raise ValidationError(f"Unknown palette: {value}", {"palette": str(value)})


class DistanceShade:
    """
    Shading for a row of a test x train distance table.

    Cells fall in a band by their position in the row range: ``near`` for the closest third,
    ``mid`` and ``far`` after it. The nearest neighbour of the row is marked instead, as a
    ``hit`` when its label agrees with the test label and a ``miss`` when it does not.
    """

    CODES = {
        Palette.VIRIDIS: {"near": 46, "mid": 37, "far": 55, "label": 227},
        Palette.GREYS: {"near": 255, "mid": 246, "far": 238, "label": 250},
    }
    HIT = 40
    MISS = 196
    MARKS = {True: "*", False: "x", None: "*"}

    @staticmethod
    def band(fraction: float) -> str:
        if fraction <= 1.0 / 3.0:
            return "near"
        if fraction <= 2.0 / 3.0:
            return "mid"
        return "far"

    @staticmethod
    def _paint(text: str, palette: Palette, code: int) -> str:
        if palette == Palette.PLAIN:
            return text
        return f"\033[38;5;{code}m{text}{RESET}"

    @staticmethod
    def cell(text: str, palette: Palette, fraction: float) -> str:
        band = DistanceShade.band(fraction)
        if palette == Palette.PLAIN:
            return text + " "
        return DistanceShade._paint(text, palette, DistanceShade.CODES[palette][band]) + " "

    @staticmethod
    def nearest(text: str, palette: Palette, correct: Optional[bool]) -> str:
        mark = DistanceShade.MARKS[correct]
        code = DistanceShade.MISS if correct is False else DistanceShade.HIT
        return DistanceShade._paint(text + mark, palette, code)

    @staticmethod
    def label(text: str, palette: Palette) -> str:
        if palette == Palette.PLAIN:
            return text
        return DistanceShade._paint(text, palette, DistanceShade.CODES[palette]["label"])
