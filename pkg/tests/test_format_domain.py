import pytest

from sous.errors import DomainParseError, DuplicateRuleError, UndeclaredIdentifierError
from sous.format_domain import parse_domain
from sous.world import ActionInstance, initial_state


SERVE_RULE = '''
rule serve(?c:container):
  pre { mixed(?c) !served(?c) }
  eff { served(?c) }
'''


def test_bundled_domain_parses(domain_text: str) -> None:
  spec = parse_domain(domain_text, 'kitchen.domain')
  assert len(spec.rules) == 9
  assert 'water' in spec.items
  state = initial_state(spec)
  assert state.holds('at', 'water', 'sink')
  assert not state.holds('at', 'water', 'shelf')
  assert state.holds('raw', 'oats')
  assert ActionInstance('collect_water') in spec.grounded


def test_empty_file() -> None:
  with pytest.raises(DomainParseError) as e:
    parse_domain('', 'empty.domain')
  assert e.value.line == 1


def test_comments_only_is_empty() -> None:
  with pytest.raises(DomainParseError):
    parse_domain('# nothing here\n\n', 'empty.domain')


def test_undeclared_identifier(domain_text: str) -> None:
  text = domain_text.replace('stovetop(pot) stovetop(pan)', 'stovetop(pot) stovetop(unicorn)')
  with pytest.raises(UndeclaredIdentifierError) as e:
    parse_domain(text)
  assert 'unicorn' in str(e.value)


def test_duplicate_rule(domain_text: str) -> None:
  with pytest.raises(DuplicateRuleError):
    parse_domain(domain_text + SERVE_RULE)


def test_missing_rule(domain_text: str) -> None:
  start = domain_text.index('rule serve')
  with pytest.raises(DomainParseError) as e:
    parse_domain(domain_text[:start])
  assert 'serve' in str(e.value)


def test_undeclared_predicate(domain_text: str) -> None:
  text = domain_text.replace('eff { served(?c) }', 'eff { plated(?c) }')
  with pytest.raises(UndeclaredIdentifierError):
    parse_domain(text)


def test_error_carries_position(domain_text: str) -> None:
  text = domain_text.replace('rule blend(?i:item):', 'rule blend(?i:gadget):')
  with pytest.raises(DomainParseError) as e:
    parse_domain(text, 'bad.domain')
  assert e.value.path == 'bad.domain'
  assert e.value.line > 1
  assert str(e.value).startswith('bad.domain:')
