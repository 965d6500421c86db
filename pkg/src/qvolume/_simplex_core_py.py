"""Pure-Python pivot kernel for the condensed simplex tableau.

Same contract as the compiled ``qvolume._simplex_core``; used as the fallback
when the extension is unavailable (or forced via ``QVOLUME_PURE_PIVOT=1``).
"""

BACKEND = "python"


def pivot_update(rows, pivot_row, pivot_col):
    """Condensed (dictionary) pivot at (pivot_row, pivot_col), in place.

    Every row in ``rows`` is transformed, including objective rows appended
    after the constraint rows.  After the call, column ``pivot_col`` carries
    the variable that just left the basis.  Entries are exact rationals; the
    kernel only relies on +, -, *, / and truthiness of the scalar type.
    """
    prow = rows[pivot_row]
    pivot = prow[pivot_col]
    inv = 1 / pivot
    width = len(prow)
    nonzero = []
    for j in range(width):
        if j == pivot_col:
            continue
        value = prow[j]
        if value:
            prow[j] = value * inv
            nonzero.append(j)
    prow[pivot_col] = inv
    for i, row in enumerate(rows):
        if i == pivot_row:
            continue
        factor = row[pivot_col]
        if not factor:
            continue
        neg = -factor
        for j in nonzero:
            value = prow[j] * neg
            if value:
                row[j] = row[j] + value
        row[pivot_col] = neg * inv
