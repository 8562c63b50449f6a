#include "fcpde/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fcpde {

namespace {

std::string grid_spec(const Grid& g) {
  std::string s = std::to_string(g.rank()) + ":" + std::to_string(g.nu());
  if (g.rank() == 2) s += "x" + std::to_string(g.nv());
  return s;
}

void write_block(std::ostream& out, const char* label, const Grid& g, const Eigen::VectorXd& v) {
  out << label << '\n';
  char buf[40];
  const Index row = g.nu();
  for (Index k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", v[k]);
    out << buf << ((k + 1) % row == 0 ? '\n' : ' ');
  }
}

std::string header_value(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("dataset truncated before " + key);
  if (line.rfind(key + "=", 0) != 0) throw DatasetError("expected '" + key + "=' but found '" + line + "'");
  return line.substr(key.size() + 1);
}

Eigen::VectorXd read_block(std::istream& in, const std::string& label, Index count) {
  std::string tok;
  if (!(in >> tok) || tok != label) throw DatasetError("expected block '" + label + "'");
  Eigen::VectorXd v(count);
  for (Index k = 0; k < count; ++k) {
    if (!(in >> tok)) throw DatasetError("block '" + label + "' truncated");
    try {
      std::size_t pos = 0;
      v[k] = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DatasetError("block '" + label + "': bad number '" + tok + "'");
    }
  }
  return v;
}

}  // namespace

void write_dataset(const Dataset& ds, std::ostream& out) {
  out << "grid=" << grid_spec(ds.grid) << '\n';
  out << "channels=" << ds.channels << '\n';
  out << "samples=" << ds.samples.size() << '\n';
  out << "case=" << ds.tag << '\n';
  for (const auto& s : ds.samples) {
    write_block(out, "b:", ds.grid, s.b.values);
    write_block(out, "bc:", ds.grid, s.bc.values);
    write_block(out, "target:", ds.grid, s.target.values);
    write_block(out, "clean:", ds.grid, s.clean.values);
  }
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ostringstream buf;
  write_dataset(ds, buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write dataset '" + path + "'");
  out << buf.str();
  if (!out) throw std::ios_base::failure("write failed for '" + path + "'");
}

Dataset read_dataset(std::istream& in, const CaseConfig& config) {
  const Grid grid = config.grid();
  if (header_value(in, "grid") != grid_spec(grid)) throw DatasetError("dataset grid does not match the config");
  int channels = 0;
  long samples = 0;
  try {
    channels = std::stoi(header_value(in, "channels"));
    samples = std::stol(header_value(in, "samples"));
  } catch (const std::invalid_argument&) {
    throw DatasetError("bad channels or samples header");
  }
  if (channels < 1 || samples < 0) throw DatasetError("bad channels or samples header");
  const std::string tag = header_value(in, "case");
  if (tag != config.tag()) throw DatasetError("dataset case '" + tag + "' does not match config " + config.tag());

  Dataset ds{tag, grid, channels, {}};
  const Index n = grid.cell_count();
  const auto pins = pinned_cells(tag, grid);
  for (long k = 0; k < samples; ++k) {
    Field b(grid, read_block(in, "b:", n * channels), channels);
    BoundaryConditions bc(grid, read_block(in, "bc:", n));
    for (Index c : pins) bc.pin(c);
    Field target(grid, read_block(in, "target:", n * channels), channels);
    Field clean(grid, read_block(in, "clean:", n * channels), channels);
    ds.samples.push_back({std::move(b), std::move(bc), std::move(target), std::move(clean)});
  }
  std::string rest;
  if (in >> rest) throw DatasetError("trailing content after the last sample");
  return ds;
}

Dataset read_dataset(const std::string& path, const CaseConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open dataset '" + path + "'");
  return read_dataset(in, config);
}

}  // namespace fcpde
