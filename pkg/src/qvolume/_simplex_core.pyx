# cython: boundscheck=False, wraparound=False
"""Compiled pivot kernel for the condensed simplex tableau.

The tableau entries are exact rational objects (gmpy2.mpq or Fraction); the
compiled kernel removes the interpreter overhead of the row-update loops while
leaving all arithmetic to the scalar type.  Semantics match
``qvolume._simplex_core_py.pivot_update`` exactly.
"""

from cpython.list cimport PyList_GET_ITEM, PyList_GET_SIZE, PyList_SET_ITEM
from cpython.ref cimport Py_INCREF, Py_DECREF

BACKEND = "cython"


cdef inline object _get(list row, Py_ssize_t j):
    return <object>PyList_GET_ITEM(row, j)


cdef inline void _set(list row, Py_ssize_t j, object value):
    cdef object old = <object>PyList_GET_ITEM(row, j)
    Py_INCREF(value)
    PyList_SET_ITEM(row, j, value)
    Py_DECREF(old)


def pivot_update(list rows, Py_ssize_t pivot_row, Py_ssize_t pivot_col):
    """Condensed (dictionary) pivot at (pivot_row, pivot_col), in place."""
    cdef list prow = <list>PyList_GET_ITEM(rows, pivot_row)
    cdef Py_ssize_t width = PyList_GET_SIZE(prow)
    cdef Py_ssize_t nrows = PyList_GET_SIZE(rows)
    cdef object pivot = _get(prow, pivot_col)
    cdef object inv = 1 / pivot
    cdef object value, factor, neg, scaled
    cdef list row
    cdef Py_ssize_t i, j, k, count

    # Scale the pivot row and collect its nonzero column positions.
    cdef list nonzero = []
    for j in range(width):
        if j == pivot_col:
            continue
        value = _get(prow, j)
        if value:
            _set(prow, j, value * inv)
            nonzero.append(j)
    _set(prow, pivot_col, inv)
    count = PyList_GET_SIZE(nonzero)

    for i in range(nrows):
        if i == pivot_row:
            continue
        row = <list>PyList_GET_ITEM(rows, i)
        factor = _get(row, pivot_col)
        if not factor:
            continue
        neg = -factor
        for k in range(count):
            j = <Py_ssize_t><object>PyList_GET_ITEM(nonzero, k)
            scaled = _get(prow, j) * neg
            if scaled:
                _set(row, j, _get(row, j) + scaled)
        _set(row, pivot_col, neg * inv)
