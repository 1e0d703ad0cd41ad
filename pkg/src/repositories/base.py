from pathlib import Path
from typing import Generic, Type, TypeVar

from pydantic import BaseModel, ValidationError

from src.conf import messages
from src.core.exceptions import InvalidInputError

ModelType = TypeVar("ModelType", bound=BaseModel)


class BaseRepository(Generic[ModelType]):
    """JSON persistence of one pydantic model type."""

    error: Type[InvalidInputError] = InvalidInputError
    message: str = "{detail}"

    def __init__(self, model: Type[ModelType]):
        self.model: Type[ModelType] = model

    def load(self, path: str | Path) -> ModelType:
        path = Path(path)
        try:
            return self.model.model_validate_json(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise self.error(messages.FILE_NOT_FOUND.format(path=path))
        except ValidationError as err:
            raise self.error(self.message.format(detail=err.errors()[0]["msg"]))

    def save(self, path: str | Path, instance: ModelType) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(instance.model_dump_json(indent=2), encoding="utf-8")
        return path
