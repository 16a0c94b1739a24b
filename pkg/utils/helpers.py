import math
import logging

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def format_float(value) -> str:
    """Fixed 12-significant-digit text form used by every result file"""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        # folds -0.0 into 0
        return "0"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def round_float(value) -> float:
    """The float a reader gets back from format_float"""
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        return value
    return float(format_float(value))


def get_readable_time(seconds: float) -> str:
    """Convert seconds to human readable format"""
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, seconds = divmod(int(seconds), 60)
    if minutes < 60:
        return f"{minutes}m {seconds}s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours}h {minutes}m"


def d_label(d: float) -> str:
    """Filename-safe label for an asymmetry value: -0.033 -> m0.033, 0.01 -> p0.01"""
    text = f"{float(d):+.6g}"
    if float(d) == 0.0:
        text = "+0"
    return text.replace("+", "p").replace("-", "m")
