"""
Result rows written by rd-sweep and eval-sampler.

Column order is the field order below and is part of the CSV contract.
"""
import csv
from pathlib import Path
from typing import Iterable, List, Optional, Type

from pydantic import BaseModel, Field


class RdPoint(BaseModel):
    """One (image, q_0, sampler) rate-distortion measurement."""
    image: str
    q_0: float = Field(..., gt=0.0)
    steps: int = Field(..., ge=0)
    beta: float = Field(..., ge=0.0)
    noise: str
    bits: int = Field(..., ge=0, description="Total file bits, header included")
    pixels: int = Field(..., gt=0)
    bpp: float
    mse: float = Field(..., ge=0.0)
    psnr: float
    sliced_w1: Optional[float] = None


class SamplerEvalRow(BaseModel):
    """One (beta, noise form) cell of the sampler ablation."""
    distribution: str
    q_0: float = Field(..., gt=0.0)
    steps: int = Field(..., ge=0)
    beta: float = Field(..., ge=0.0)
    noise: str
    supported: bool = True
    samples: int = Field(..., ge=0)
    sliced_w1: Optional[float] = None
    mse: Optional[float] = None


def columns(model: Type[BaseModel]) -> List[str]:
    return list(model.model_fields)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, model: Type[BaseModel], rows: Iterable[BaseModel]) -> None:
    """Header row plus one line per result, in the model's field order."""
    names = columns(model)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(names)
        for row in rows:
            data = row.model_dump()
            writer.writerow([_cell(data[name]) for name in names])
