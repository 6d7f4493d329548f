"""
Driver package - run configuration, the time loop and output writers
"""
