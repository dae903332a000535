from cfrpsro.cli import main
import sys

sys.exit(main())
