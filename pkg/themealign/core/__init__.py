"""Numerical engines: samplers, decoding, disambiguation"""
