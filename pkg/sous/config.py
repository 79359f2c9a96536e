from typing import *
import json
import os
import sys

import sous.log as log


version = (0, 3, 0)

dev_mode: bool = True
root_directory: str = ''
assets_directory: str = ''
home_directory: str = ''
log_file: str = ''
settings_file: str = ''
cache_file: str = ''
output_directory: str = ''

_initialized = False

DEFAULT_JUDGE_TIMEOUT = 10.0


def version_str(delim: str) -> str:
  return delim.join(map(str, version))

def init(home: Optional[str] = None) -> None:
  global _initialized, dev_mode, root_directory, assets_directory, home_directory
  global log_file, settings_file, cache_file, output_directory
  if getattr(sys, 'frozen', False):
    dev_mode = False
    root_directory = os.path.dirname(sys.executable)
    bundle_dir = getattr(sys, '_MEIPASS', root_directory)
    assets_directory = os.path.join(bundle_dir, 'assets')
  else:
    dev_mode = '--nodev' not in sys.argv
    root_directory = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    assets_directory = os.path.join(root_directory, 'assets')

  home_directory = home or os.environ.get('SOUS_HOME') or root_directory
  log_file = os.path.join(home_directory, 'log.txt')
  settings_file = os.path.join(home_directory, 'settings.json')
  cache_file = os.path.join(home_directory, 'judge_cache.json')
  output_directory = os.path.join(home_directory, 'out')
  _initialized = True

def ensure_init() -> None:
  if not _initialized:
    init()

def asset(*parts: str) -> str:
  ensure_init()
  return os.path.join(assets_directory, *parts)


class _Settings:
  def _read_settings(self) -> Dict[str, Any]:
    ensure_init()
    if os.path.exists(settings_file):
      with open(settings_file, 'r') as f:
        return cast(Dict[str, Any], json.load(f))
    else:
      return {}

  def _save_settings(self, settings: Dict[str, Any]) -> None:
    ensure_init()
    with open(settings_file, 'w') as f:
      json.dump(settings, f, indent=2)

  def get(self, key: str, default: Optional[Any] = None) -> Optional[Any]:
    return self._read_settings().get(key, default)

  def __setitem__(self, key: str, value: Any) -> None:
    settings = self._read_settings()
    settings[key] = value
    self._save_settings(settings)

settings = _Settings()


def judge_endpoint(override: Optional[str] = None) -> Optional[str]:
  """Flag beats the SOUS_JUDGE_ENDPOINT variable, which beats the settings file."""
  if override:
    return override
  from_env = os.environ.get('SOUS_JUDGE_ENDPOINT')
  if from_env:
    return from_env
  return cast(Optional[str], settings.get('judge_endpoint'))

def judge_timeout() -> float:
  value = settings.get('judge_timeout', DEFAULT_JUDGE_TIMEOUT)
  try:
    return float(cast(Any, value))
  except (TypeError, ValueError):
    log.warn('Ignoring invalid judge_timeout setting:', value)
    return DEFAULT_JUDGE_TIMEOUT
