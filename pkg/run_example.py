from abers.example import example
example(quick=True)
