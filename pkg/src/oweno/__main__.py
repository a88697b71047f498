import sys

from oweno.cli import main

sys.exit(main())
