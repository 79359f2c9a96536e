"""Reader for the line-oriented kitchen domain format.

A domain file is a list of sections. Section headers and rule blocks start
in the first column; their contents are indented or follow on the same line.

    items: oats milk water            identifiers, whitespace or comma separated
    containers: bowl pot blender
    appliances: stove blender         an identifier may be container and appliance
    locations: shelf counter sink
    predicates: at/2 raw/1 on/1       name/arity
    families:                         mutually exclusive conditions, one group per line
      texture: raw blended
    initial:                          literals; ?type expands over that type, ! retracts
      at(?item,shelf) raw(?item)
      !at(water,shelf) at(water,sink)
    rule pour(?i:item, ?d:container):
      pre { gathered(?i) !at(?i,?d) }
      eff { !at(?i,*) at(?i,?d) }

`*` is only allowed in deleted effects, where it matches any argument.
Comments start with `#`.
"""

from typing import *
from dataclasses import dataclass
import re

from sous.errors import DomainParseError, UndeclaredIdentifierError, DuplicateRuleError
from sous.world import (
  DomainSpec, Rule, Param, Condition, Literal, VERBS, PARAM_TYPES, WILDCARD,
)


LIST_SECTIONS = ('items', 'containers', 'appliances', 'locations')
SECTIONS = LIST_SECTIONS + ('predicates', 'families', 'initial')

_TOKEN_RE = re.compile(r'''
  (?P<space>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<number>[0-9]+)
  | (?P<punct>[(){}:,!/*])
''', re.VERBOSE)


@dataclass(frozen=True)
class Token:
  kind: str
  text: str
  line: int
  column: int


def tokenize(text: str, path: str) -> List[Token]:
  tokens: List[Token] = []
  line = 1
  line_start = 0
  pos = 0
  while pos < len(text):
    match = _TOKEN_RE.match(text, pos)
    if match is None:
      raise DomainParseError(path, line, pos - line_start + 1, f'Unexpected character {text[pos]!r}')
    kind = cast(str, match.lastgroup)
    if kind == 'newline':
      line += 1
      line_start = match.end()
    elif kind not in ('space', 'comment'):
      tokens.append(Token(kind, match.group(), line, match.start() - line_start + 1))
    pos = match.end()
  return tokens


class _Parser:
  def __init__(self, tokens: List[Token], path: str) -> None:
    self.tokens = tokens
    self.path = path
    self.index = 0

  def error(self, message: str, token: Optional[Token] = None) -> DomainParseError:
    token = token or self.peek()
    if token is None:
      last = self.tokens[-1] if len(self.tokens) > 0 else None
      line = last.line if last is not None else 1
      column = last.column + len(last.text) if last is not None else 1
      return DomainParseError(self.path, line, column, message + ' at end of file')
    return DomainParseError(self.path, token.line, token.column, message)

  def peek(self) -> Optional[Token]:
    if self.index < len(self.tokens):
      return self.tokens[self.index]
    return None

  def next(self) -> Token:
    token = self.peek()
    if token is None:
      raise self.error('Unexpected end of file')
    self.index += 1
    return token

  def expect(self, text: str) -> Token:
    token = self.next()
    if token.text != text:
      raise self.error(f'Expected {text!r}, found {token.text!r}', token)
    return token

  def expect_kind(self, kind: str) -> Token:
    token = self.next()
    if token.kind != kind:
      raise self.error(f'Expected {kind}, found {token.text!r}', token)
    return token

  def at_header(self) -> bool:
    token = self.peek()
    return token is None or token.column == 1

  def body(self) -> List[Token]:
    """Tokens up to the next header, which may start on the same line."""
    result = []
    while not self.at_header():
      result.append(self.next())
    return result


def _identifiers(parser: _Parser, tokens: List[Token]) -> List[str]:
  names = []
  for token in tokens:
    if token.text == ',':
      continue
    if token.kind != 'ident':
      raise parser.error(f'Expected identifier, found {token.text!r}', token)
    names.append(token.text)
  return names


def _literal(parser: _Parser) -> Tuple[bool, str, List[Token], Token]:
  first = parser.next()
  positive = True
  name = first
  if first.text == '!':
    positive = False
    name = parser.next()
  if name.kind != 'ident':
    raise parser.error(f'Expected predicate, found {name.text!r}', name)
  parser.expect('(')
  args: List[Token] = []
  token = parser.next()
  while token.text != ')':
    if token.text == ',':
      token = parser.next()
      continue
    if token.kind not in ('ident', 'var') and token.text != WILDCARD:
      raise parser.error(f'Expected argument, found {token.text!r}', token)
    args.append(token)
    token = parser.next()
  return positive, name.text, args, name


def _literal_group(parser: _Parser) -> List[Tuple[bool, str, List[Token], Token]]:
  parser.expect('{')
  literals = []
  while True:
    token = parser.peek()
    if token is None:
      raise parser.error('Unclosed {')
    if token.text == '}':
      parser.next()
      return literals
    literals.append(_literal(parser))


class _Builder:
  def __init__(self, parser: _Parser) -> None:
    self.parser = parser
    self.lists: Dict[str, List[str]] = {}
    self.predicates: Dict[str, int] = {}
    self.families: Dict[str, List[str]] = {}
    self.initial_tokens: List[Token] = []
    self.rules: Dict[str, Rule] = {}
    self.rule_tokens: Dict[str, Token] = {}
    self.seen: Set[str] = set()

  def where(self, token: Token) -> str:
    return f'{self.parser.path}:{token.line}:{token.column}'

  def check_predicate(self, name: str, arity: int, token: Token) -> None:
    if name not in self.predicates:
      raise UndeclaredIdentifierError(name, self.where(token))
    if self.predicates[name] != arity:
      raise self.parser.error(f'{name} takes {self.predicates[name]} arguments, found {arity}', token)

  def section(self, header: Token) -> None:
    parser = self.parser
    name = header.text
    if name not in SECTIONS:
      raise parser.error(f'Unknown section {name!r}', header)
    if name in self.seen:
      raise parser.error(f'Duplicate section {name!r}', header)
    self.seen.add(name)
    parser.expect(':')
    tokens = parser.body()

    if name in LIST_SECTIONS:
      self.lists[name] = _identifiers(parser, tokens)
    elif name == 'predicates':
      i = 0
      while i < len(tokens):
        if tokens[i].text == ',':
          i += 1
          continue
        if i + 2 >= len(tokens) or tokens[i + 1].text != '/' or tokens[i + 2].kind != 'number':
          raise parser.error('Expected name/arity', tokens[i])
        self.predicates[tokens[i].text] = int(tokens[i + 2].text)
        i += 3
    elif name == 'families':
      lines: Dict[int, List[Token]] = {}
      for token in tokens:
        lines.setdefault(token.line, []).append(token)
      for line_tokens in lines.values():
        if len(line_tokens) < 3 or line_tokens[1].text != ':':
          raise parser.error('Expected family: predicate predicate...', line_tokens[0])
        self.families[line_tokens[0].text] = _identifiers(parser, line_tokens[2:])
    elif name == 'initial':
      self.initial_tokens = tokens

  def rule(self, header: Token) -> None:
    parser = self.parser
    verb = parser.expect_kind('ident')
    if verb.text not in VERBS:
      raise parser.error(f'Unknown verb {verb.text!r}', verb)
    if verb.text in self.rules:
      raise DuplicateRuleError(verb.text)
    parser.expect('(')
    params: List[Param] = []
    token = parser.next()
    while token.text != ')':
      if token.text == ',':
        token = parser.next()
        continue
      if token.kind != 'var':
        raise parser.error(f'Expected parameter, found {token.text!r}', token)
      parser.expect(':')
      type_ = parser.expect_kind('ident')
      if type_.text not in PARAM_TYPES:
        raise parser.error(f'Unknown parameter type {type_.text!r}', type_)
      params.append(Param(token.text, type_.text))
      token = parser.next()
    if len(params) > 2:
      raise parser.error('Rules take at most two parameters', verb)
    parser.expect(':')
    parser.expect('pre')
    pre = _literal_group(parser)
    parser.expect('eff')
    eff = _literal_group(parser)
    if not parser.at_header():
      raise parser.error('Unexpected tokens after rule')
    self.rules[verb.text] = Rule(
      verb.text,
      tuple(params),
      tuple(self.condition(params, l, allow_wildcard=False) for l in pre),
      tuple(self.condition(params, l, allow_wildcard=not l[0]) for l in eff),
    )
    self.rule_tokens[verb.text] = verb

  def condition(
    self,
    params: List[Param],
    literal: Tuple[bool, str, List[Token], Token],
    allow_wildcard: bool,
  ) -> Condition:
    positive, name, args, token = literal
    self.check_predicate(name, len(args), token)
    declared = self.declared()
    names = {p.name for p in params}
    for arg in args:
      if arg.text == WILDCARD:
        if not allow_wildcard:
          raise self.parser.error('* is only allowed in deleted effects', arg)
      elif arg.kind == 'var':
        if arg.text not in names:
          raise UndeclaredIdentifierError(arg.text, self.where(arg))
      elif arg.text not in declared:
        raise UndeclaredIdentifierError(arg.text, self.where(arg))
    return Condition(positive, name, tuple(a.text for a in args))

  def declared(self) -> Set[str]:
    return {name for names in self.lists.values() for name in names}

  def initial(self) -> FrozenSet[Literal]:
    sub = _Parser(self.initial_tokens, self.parser.path)
    literals: Set[Literal] = set()
    declared = self.declared()
    while sub.peek() is not None:
      positive, name, args, token = _literal(sub)
      self.check_predicate(name, len(args), token)
      domains: List[List[str]] = []
      for arg in args:
        if arg.kind == 'var':
          type_ = arg.text[1:]
          if type_ not in PARAM_TYPES:
            raise sub.error(f'Unknown type {type_!r}', arg)
          domains.append(self.lists.get(type_ + 's', []))
        elif arg.text == WILDCARD:
          raise sub.error('* is not allowed in the initial state', arg)
        elif arg.text not in declared:
          raise UndeclaredIdentifierError(arg.text, self.where(arg))
        else:
          domains.append([arg.text])
      expanded = [(name,) + combo for combo in _product(domains)]
      if positive:
        literals.update(expanded)
      else:
        literals.difference_update(expanded)
    return frozenset(literals)

  def build(self) -> DomainSpec:
    for name in LIST_SECTIONS + ('predicates',):
      if name not in self.seen:
        raise self.parser.error(f'Missing section {name!r}')
    missing = [verb for verb in VERBS if verb not in self.rules]
    if len(missing) > 0:
      raise self.parser.error('Missing rules for ' + ', '.join(missing))
    items = set(self.lists['items'])
    for other in ('containers', 'appliances', 'locations'):
      clash = items & set(self.lists[other])
      if len(clash) > 0:
        raise self.parser.error(f'{sorted(clash)[0]} declared as both item and {other[:-1]}')
    for family, members in self.families.items():
      for member in members:
        if member not in self.predicates:
          raise UndeclaredIdentifierError(member, f'family {family}')
    return DomainSpec(
      items = self.lists['items'],
      containers = self.lists['containers'],
      appliances = self.lists['appliances'],
      locations = self.lists['locations'],
      predicates = self.predicates,
      families = self.families,
      initial = self.initial(),
      rules = {verb: self.rules[verb] for verb in VERBS},
    )


def _product(domains: List[List[str]]) -> List[Tuple[str, ...]]:
  result: List[Tuple[str, ...]] = [()]
  for domain in domains:
    result = [prefix + (value,) for prefix in result for value in domain]
  return result


def parse_domain(text: str, path: str = '<domain>') -> DomainSpec:
  tokens = tokenize(text, path)
  if len(tokens) == 0:
    raise DomainParseError(path, 1, 1, 'Empty domain file')
  parser = _Parser(tokens, path)
  builder = _Builder(parser)
  while parser.peek() is not None:
    header = parser.next()
    if header.column != 1:
      raise parser.error('Expected a section header in the first column', header)
    if header.text == 'rule':
      builder.rule(header)
    else:
      builder.section(header)
  return builder.build()


def load_domain(path: str) -> DomainSpec:
  with open(path, 'r') as f:
    return parse_domain(f.read(), path)


__all__ = ['load_domain', 'parse_domain']
