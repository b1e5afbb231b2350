"""
hbsa - complete hyperentangled Bell-state analysis simulator
"""
