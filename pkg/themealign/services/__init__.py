"""Pipeline services: loading, annotation, alignment and persistence"""
