from typing import *
from dataclasses import dataclass
import sys


T = TypeVar('T')

@dataclass(frozen=True)
class Progress:
  progress: float
  status: str

# Long-running work is a generator of progress reports returning its result.
Loading = Generator[Progress, None, T]

def in_progress(progress: float, status: str = '') -> Progress:
  return Progress(progress, status)

def load_child(start: float, stop: float, prefix: str, child: Loading[T]) -> Loading[T]:
  """Run `child` as the [start, stop] slice of a parent's progress."""
  while True:
    try:
      report = next(child)
    except StopIteration as result:
      return cast(T, result.value)
    yield in_progress(start + report.progress * (stop - start), prefix + report.status)


def finish_loading(loader: Loading[T]) -> T:
  """Run to completion without reporting."""
  while True:
    try:
      next(loader)
    except StopIteration as result:
      return cast(T, result.value)


def show_progress(loader: Loading[T], width: int = 40, stream: Optional[TextIO] = None) -> T:
  """Drive a loader to completion while drawing a one-line progress bar."""
  out = stream or sys.stderr
  prev_length = 0
  while True:
    try:
      report = next(loader)
    except StopIteration as result:
      if prev_length > 0:
        out.write('\n')
      return cast(T, result.value)
    filled = int(report.progress * width)
    line = '[' + '#' * filled + ' ' * (width - filled) + '] ' + report.status
    out.write('\r' + ' ' * prev_length + '\r' + line)
    out.flush()
    prev_length = len(line)


__all__ = [
  'Progress',
  'Loading',
  'in_progress',
  'load_child',
  'finish_loading',
  'show_progress',
]
