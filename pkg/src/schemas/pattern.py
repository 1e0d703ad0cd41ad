from pydantic import BaseModel, Field, model_validator

from src.conf import messages
from src.entity.models import PointPattern, Window


class WindowSchema(BaseModel):
    x0: float = 0.0
    y0: float = 0.0
    x1: float = 1.0
    y1: float = 1.0

    @model_validator(mode="after")
    def check_corners(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError(messages.WINDOW_DEGENERATE)
        return self

    @classmethod
    def from_entity(cls, window: Window) -> "WindowSchema":
        return cls(x0=window.x0, y0=window.y0, x1=window.x1, y1=window.y1)

    def to_entity(self) -> Window:
        return Window(self.x0, self.y0, self.x1, self.y1)


class PatternSchema(BaseModel):
    window: WindowSchema = Field(default_factory=WindowSchema)
    x: list[float]
    y: list[float]
    intensity: list[float] | None = None

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.x) != len(self.y):
            raise ValueError(messages.PATTERN_VALUES)
        if self.intensity is not None and len(self.intensity) != len(self.x):
            raise ValueError(messages.INTENSITY_LENGTH)
        return self

    @classmethod
    def from_entity(cls, pattern: PointPattern) -> "PatternSchema":
        intensity = None if pattern.intensity is None else pattern.intensity.tolist()
        return cls(
            window=WindowSchema.from_entity(pattern.window),
            x=pattern.x.tolist(),
            y=pattern.y.tolist(),
            intensity=intensity,
        )

    def to_entity(self) -> PointPattern:
        return PointPattern(self.x, self.y, self.window.to_entity(), self.intensity)
