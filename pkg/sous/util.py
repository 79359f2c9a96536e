from typing import *

T = TypeVar('T')

def topological_sort(dependencies: Dict[T, List[T]]) -> Optional[List[T]]:
  """Order vertices so each comes after its dependencies.

  Returns None if the graph has a cycle. Among ready vertices the earliest
  declared one is emitted first, so the result is deterministic.
  """
  remaining = {v: set(e) for v, e in dependencies.items()}
  order = list(dependencies)
  result: List[T] = []
  while len(remaining) > 0:
    ready = next((v for v in order if v in remaining and len(remaining[v]) == 0), None)
    if ready is None:
      return None
    result.append(ready)
    del remaining[ready]
    for deps in remaining.values():
      deps.discard(ready)
  return result

def format_align(fmt: str, line_args: Sequence[Sequence[object]]) -> List[str]:
  results = ['' for _ in line_args]

  part_fmts = fmt.split('%a')
  for k, part_fmt in enumerate(part_fmts):
    if k != len(part_fmts) - 1:
      assert part_fmt.count('%s') == 1, part_fmt
    part_fmt = part_fmt.replace('%s', '{padding}')

    lengths = [len(part_fmt.format(*args, padding='')) for args in line_args]
    max_length = max(lengths, default=0)

    for i, (args, length) in enumerate(zip(line_args, lengths)):
      padding = ' ' * (max_length - length)
      results[i] += part_fmt.format(*args, padding=padding)

  return results


__all__ = [
  'topological_sort',
  'format_align',
]
