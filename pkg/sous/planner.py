from __future__ import annotations

from typing import *
from dataclasses import dataclass, field

from sous.attractor import AttractorField, ScoreTable, ScoreWeights
from sous.belief import GoalBelief
from sous.errors import NoLegalActionError
from sous.world import ActionInstance, DomainSpec, WorldState, ROBOT, HUMAN, legal_actions, step


# Given a node's state and the agent to move, the actions it may consider,
# or None for every legal action.
ActionFilter = Callable[[WorldState, str], Optional[Iterable[ActionInstance]]]


@dataclass(frozen=True)
class PlannerConfig:
  horizon: int = 2
  branch_cap: Optional[int] = 4 # None keeps every legal action
  weights: ScoreWeights = ScoreWeights()
  include_human_terms: bool = True

  def __post_init__(self) -> None:
    if self.horizon < 1:
      raise ValueError(f'Planning horizon must be positive, got {self.horizon}')
    if self.branch_cap is not None and self.branch_cap < 1:
      raise ValueError(f'Branch cap must be positive, got {self.branch_cap}')


@dataclass
class PlanNode:
  state: WorldState
  incoming_action: Optional[ActionInstance]
  depth: int
  acting_agent: str
  node_score: float = 0.0
  children: List[PlanNode] = field(default_factory=list)
  parent: Optional[PlanNode] = field(default=None, repr=False, compare=False)

  def path(self) -> List[PlanNode]:
    """Nodes from just below the root down to this one."""
    nodes = []
    node: Optional[PlanNode] = self
    while node is not None and node.parent is not None:
      nodes.append(node)
      node = node.parent
    return nodes[::-1]

  def leaves(self) -> List[PlanNode]:
    if len(self.children) == 0:
      return [self]
    return [leaf for child in self.children for leaf in child.leaves()]

  def size(self) -> int:
    return 1 + sum(child.size() for child in self.children)


def ranked_actions(
  state: WorldState,
  agent: str,
  spec: DomainSpec,
  score: Callable[[ActionInstance], float],
  branch_cap: Optional[int],
  action_filter: Optional[ActionFilter] = None,
) -> List[Tuple[ActionInstance, float]]:
  """Legal actions for `agent`, best scoring first, cut to the branch cap."""
  among = action_filter(state, agent) if action_filter is not None else None
  scored = [(action, score(action)) for action in legal_actions(state, spec, agent, among)]
  scored.sort(key=lambda pair: (-pair[1], pair[0].sort_key()))
  return scored if branch_cap is None else scored[:branch_cap]


def expand(
  root_state: WorldState,
  belief: GoalBelief,
  pref_fields: Sequence[AttractorField],
  goal_fields: Mapping[str, AttractorField],
  cfg: PlannerConfig,
  spec: DomainSpec,
  action_filter: Optional[ActionFilter] = None,
  goals: Optional[Iterable[str]] = None,
) -> PlanNode:
  """Build the lookahead tree from a robot turn.

  Agents alternate by depth and both are scored with the same attractor
  sum. Nodes without a legal action are leaves.
  """
  if root_state.turn != ROBOT:
    raise ValueError('Planning starts on the robot turn')
  score = ScoreTable(belief, goal_fields, pref_fields, cfg.weights, goals)
  root = PlanNode(root_state, None, 0, ROBOT)

  def grow(node: PlanNode) -> None:
    if node.depth >= cfg.horizon:
      return
    agent = node.state.turn
    for action, value in ranked_actions(node.state, agent, spec, score, cfg.branch_cap, action_filter):
      child = PlanNode(step(node.state, action, spec), action, node.depth + 1, agent, value, parent=node)
      node.children.append(child)
      grow(child)

  grow(root)
  return root


def branch_cost(leaf: PlanNode, include_human_terms: bool = True) -> float:
  return -sum(
    node.node_score for node in leaf.path()
      if include_human_terms or node.acting_agent != HUMAN
  )


def _branch_key(leaf: PlanNode, include_human_terms: bool) -> Tuple[float, Tuple[Tuple[str, str, str, str], ...]]:
  path = leaf.path()
  return (
    branch_cost(leaf, include_human_terms),
    tuple(node.incoming_action.sort_key() for node in path if node.incoming_action is not None),
  )


def best_branch(tree: PlanNode, include_human_terms: bool = True) -> List[PlanNode]:
  """The minimum-cost root to leaf path; ties go to the smallest action sequence."""
  if len(tree.children) == 0:
    raise NoLegalActionError('The robot has no legal action')
  leaf = min(tree.leaves(), key=lambda leaf: _branch_key(leaf, include_human_terms))
  return leaf.path()


def select_action(tree: PlanNode, include_human_terms: bool = True) -> ActionInstance:
  first = best_branch(tree, include_human_terms)[0]
  assert first.incoming_action is not None
  return first.incoming_action


def choose_robot_action(tree: PlanNode, include_human_terms: bool = True) -> Optional[ActionInstance]:
  """The robot's move, or None to wait when its best move has no pull."""
  try:
    first = best_branch(tree, include_human_terms)[0]
  except NoLegalActionError:
    return None
  if first.node_score <= 0:
    return None
  return first.incoming_action


__all__ = [
  'ActionFilter',
  'PlannerConfig',
  'PlanNode',
  'ranked_actions',
  'expand',
  'branch_cost',
  'best_branch',
  'select_action',
  'choose_robot_action',
]
