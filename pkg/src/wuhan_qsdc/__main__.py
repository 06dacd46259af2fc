import sys

from wuhan_qsdc.cli import main

sys.exit(main())
