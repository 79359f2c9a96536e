from typing import *


class SousError(Exception):
  pass


class ConfigError(SousError):
  pass


class ParseError(SousError):
  def __init__(self, path: str, line: int, column: int, message: str) -> None:
    super().__init__(f'{path}:{line}:{column}: {message}')
    self.path = path
    self.line = line
    self.column = column

class DomainParseError(ParseError):
  pass

class BankParseError(ParseError):
  pass

class QuestionParseError(ParseError):
  pass

class UndeclaredIdentifierError(SousError):
  def __init__(self, identifier: str, where: str = '') -> None:
    super().__init__(f'Undeclared identifier {identifier!r}' + (f' in {where}' if where else ''))
    self.identifier = identifier

class DuplicateRuleError(SousError):
  def __init__(self, verb: str) -> None:
    super().__init__(f'Duplicate rule for verb {verb!r}')
    self.verb = verb


class IllegalActionError(SousError):
  pass

class WrongTurnError(SousError):
  pass


class CyclicPrecedenceError(SousError):
  pass

class InexecutableLinearizationError(SousError):
  def __init__(self, goal_id: str, index: int, action: str) -> None:
    super().__init__(f'Goal {goal_id}: step {index} ({action}) is not executable')
    self.goal_id = goal_id
    self.index = index
    self.action = action


class UnknownSourceError(SousError):
  pass

class JudgeUnavailableError(SousError):
  pass

class MalformedJudgeOutputError(SousError):
  pass

class MissingFieldError(SousError):
  pass


class EmptyBankError(SousError):
  pass

class ZeroLikelihoodError(SousError):
  pass

class MissingLikelihoodError(SousError):
  pass

class UnknownAnswerError(SousError):
  pass


class NoLegalActionError(SousError):
  pass

class StuckError(SousError):
  pass

class StuckEpisodeError(SousError):
  pass


__all__ = [
  'SousError',
  'ConfigError',
  'ParseError',
  'DomainParseError',
  'BankParseError',
  'QuestionParseError',
  'UndeclaredIdentifierError',
  'DuplicateRuleError',
  'IllegalActionError',
  'WrongTurnError',
  'CyclicPrecedenceError',
  'InexecutableLinearizationError',
  'UnknownSourceError',
  'JudgeUnavailableError',
  'MalformedJudgeOutputError',
  'MissingFieldError',
  'EmptyBankError',
  'ZeroLikelihoodError',
  'MissingLikelihoodError',
  'UnknownAnswerError',
  'NoLegalActionError',
  'StuckError',
  'StuckEpisodeError',
]
