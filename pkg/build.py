import subprocess
import sys
import shutil
import os

import sous.config as config

config.init()

if 'clean' in sys.argv[1:]:
  build_files = ['dist', 'build']
  for file in build_files:
    if os.path.isdir(file):
      print('Removing ' + file)
      shutil.rmtree(file)

if 'dist' in sys.argv[1:]:
  shutil.rmtree('build/dist', ignore_errors=True)

  subprocess.run(
    [
      'pyinstaller',
      '--onefile',
      '--specpath', 'build',
      '--distpath', 'build/dist',
      '--add-data', os.path.abspath('assets') + os.pathsep + 'assets',
      '--name', 'sous',
      'run.py',
    ],
    check=True,
  )

  print('Creating zip file')
  shutil.make_archive(
    'build/sous_' + config.version_str('_'),
    'zip',
    'build/dist',
  )
