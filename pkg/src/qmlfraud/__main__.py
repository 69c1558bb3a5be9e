import sys

from qmlfraud.harness.cli import main

sys.exit(main())
