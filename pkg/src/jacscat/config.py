"""Run configuration shared by the CLI and the experiment scripts."""

from dataclasses import dataclass, field

from .errors import ValidationError


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class RunConfig:
    grid_size: int = 1024
    truncation: int = 256
    eps_ladder: tuple = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12)
    m_ladder: tuple = (64, 128, 256)
    tol_unitarity: float = 1e-10
    tol_roundtrip: float = 1e-6
    tol_defect: float = 1e-6
    s_floor: float = 1e-8
    log_floor: float = 50.0
    output_dir: str = "out"
    seed: int = 0
    # half-width of the reconstruction window; None picks it from the input
    window_half_width: int | None = None

    def __post_init__(self):
        if self.grid_size < 64 or not _is_power_of_two(self.grid_size):
            raise ValidationError("grid_size must be a power of two >= 64")
        if self.truncation > self.grid_size // 4:
            raise ValidationError("truncation must be <= grid_size/4")
        if any(e <= 0 for e in self.eps_ladder):
            raise ValidationError("eps_ladder entries must be positive")
        if list(self.eps_ladder) != sorted(self.eps_ladder, reverse=True):
            raise ValidationError("eps_ladder must be decreasing")
