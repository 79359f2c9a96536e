import sys
import traceback

import sous.log as log
import sous.config as config

config.init()
log.debug('Sous', config.version_str('.'))

with open(config.log_file, 'a') as log_file:
  def append_to_log(message: log.LogMessage) -> None:
    log_file.write(str(message) + '\n')
    log_file.flush()
  log.subscribe(append_to_log)

  try:
    from sous.main import run
    # import cProfile
    # cProfile.run('run()', sort='cumtime')
    code = run()
  except SystemExit:
    raise
  except:
    log.error('Uncaught:', traceback.format_exc())
    sys.exit(1)
  sys.exit(code)
