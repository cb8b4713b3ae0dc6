# monodromy_core package
