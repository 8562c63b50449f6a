#ifndef FCPDE_DATASET_IO_HPP
#define FCPDE_DATASET_IO_HPP

#include "fcpde/datagen.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace fcpde {

/// Malformed dataset file or one that does not fit the configured case.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header lines grid=, channels=, samples=, case=, then the blocks b:, bc:,
/// target:, clean: of every sample. Values use 17 significant digits, one
/// line per grid row.
void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::string& path);

/// The config supplies the physical grid and boundary layout, which the file
/// does not carry; grid shape and case tag must agree with it.
Dataset read_dataset(std::istream& in, const CaseConfig& config);
Dataset read_dataset(const std::string& path, const CaseConfig& config);

}  // namespace fcpde

#endif  // FCPDE_DATASET_IO_HPP
