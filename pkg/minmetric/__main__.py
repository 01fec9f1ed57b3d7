from .lab_cli import main

main()
