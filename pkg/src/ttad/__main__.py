from ttad.cli import main

main()
