#pragma once

#include <iosfwd>
#include <string>

#include "fluidfrag/tensors.hpp"

namespace fluidfrag {

/// Parse FCIDUMP text. Header: namelist with NORB and NELEC terminated by
/// &END or /. Body: "value i j k l" lines, 1-indexed; i=j=k=l=0 carries the
/// nuclear repulsion, k=l=0 a core one-electron entry, otherwise an (ij|kl)
/// entry filled into all 8 symmetry-equivalent slots. Point-group fields
/// (ORBSYM, ISYM, MS2) are accepted and ignored.
RawIntegrals parse_fcidump(std::istream& in);
RawIntegrals parse_fcidump_string(const std::string& text);
RawIntegrals parse_fcidump_file(const std::string& path);

/// Emit in canonical order: unique (ij|kl) slots with i>=j, k>=l and
/// pair(i,j) >= pair(k,l), then one-electron entries with i>=j, then e_nuc.
/// Values are written with 17 significant digits so a re-parse reproduces
/// the tensors bit-identically.
void write_fcidump(std::ostream& out, const RawIntegrals& raw);
void write_fcidump_file(const std::string& path, const RawIntegrals& raw);

}  // namespace fluidfrag
