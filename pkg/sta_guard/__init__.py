"""STA Guard: shortcut-to-adiabaticity pulses robust against unwanted transitions."""
