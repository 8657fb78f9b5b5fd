#include "vsum/dataset.hpp"

#include "vsum/errors.hpp"

#ifdef VSUM_HAVE_HDF5
#include <H5Cpp.h>
#endif

#include <vector>

namespace vsum {

namespace fs = std::filesystem;

#ifdef VSUM_HAVE_HDF5

bool hdf5_available() noexcept { return true; }

namespace {

bool has_child(const H5::Group& g, const std::string& name) { return H5Lexists(g.getId(), name.c_str(), H5P_DEFAULT) > 0; }

std::vector<hsize_t> dims_of(const H5::DataSet& ds) {
  const auto space = ds.getSpace();
  std::vector<hsize_t> dims(static_cast<std::size_t>(space.getSimpleExtentNdims()));
  if (!dims.empty()) space.getSimpleExtentDims(dims.data());
  return dims;
}

hsize_t element_count(const std::vector<hsize_t>& dims) {
  hsize_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

template <typename T>
std::vector<T> read_all(const H5::DataSet& ds, const H5::PredType& type, std::vector<hsize_t>& dims) {
  dims = dims_of(ds);
  std::vector<T> buf(static_cast<std::size_t>(element_count(dims)));
  if (!buf.empty()) ds.read(buf.data(), type);
  return buf;
}

const H5::DataSet open_required(const H5::Group& g, const std::string& video, const char* name) {
  if (!has_child(g, name)) throw LoadError("video '" + video + "': missing field '" + name + "'");
  return g.openDataSet(name);
}

VideoRecord read_group(const H5::Group& g, const std::string& id) {
  FeatureSequence seq;
  VideoAnnotations ann;
  seq.video_id = id;
  std::vector<hsize_t> dims;

  const auto feats = read_all<float>(open_required(g, id, "features"), H5::PredType::NATIVE_FLOAT, dims);
  if (dims.size() != 2) throw ValidationError("video '" + id + "': features must be 2-D");
  seq.features.resize(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  for (std::size_t i = 0; i < feats.size(); ++i) seq.features.data()[i] = feats[i];

  seq.picks = read_all<std::int64_t>(open_required(g, id, "picks"), H5::PredType::NATIVE_INT64, dims);
  const auto nf = read_all<std::int64_t>(open_required(g, id, "n_frames"), H5::PredType::NATIVE_INT64, dims);
  if (nf.size() != 1) throw ValidationError("video '" + id + "': n_frames must be a scalar");
  seq.n_frames = nf[0];

  const auto gt = read_all<float>(open_required(g, id, "gtscore"), H5::PredType::NATIVE_FLOAT, dims);
  ann.gt_score.assign(gt.begin(), gt.end());

  if (has_child(g, "user_scores")) {
    const auto us = read_all<float>(g.openDataSet("user_scores"), H5::PredType::NATIVE_FLOAT, dims);
    if (dims.size() != 2) throw ValidationError("video '" + id + "': user_scores must be 2-D");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
    for (hsize_t r = 0; r < dims[0]; ++r)
      for (hsize_t c = 0; c < dims[1]; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = us[r * dims[1] + c];
    ann.user_scores = std::move(m);
  }
  if (has_child(g, "user_summary")) {
    // Public containers store selections as floats; read as doubles and check.
    const auto us = read_all<double>(g.openDataSet("user_summary"), H5::PredType::NATIVE_DOUBLE, dims);
    if (dims.size() != 2) throw ValidationError("video '" + id + "': user_summary must be 2-D");
    BinaryMatrix m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
    for (std::size_t i = 0; i < us.size(); ++i) {
      if (us[i] != 0.0 && us[i] != 1.0) throw ValidationError("video '" + id + "': user_summary must be binary");
      m.data()[i] = static_cast<std::uint8_t>(us[i]);
    }
    ann.user_summaries = std::move(m);
  }
  if (has_child(g, "change_points")) {
    const auto cp = read_all<std::int64_t>(g.openDataSet("change_points"), H5::PredType::NATIVE_INT64, dims);
    if (dims.size() != 2 || dims[1] != 2) throw ValidationError("video '" + id + "': change_points must be S x 2");
    std::vector<FrameRange> cps;
    for (hsize_t s = 0; s < dims[0]; ++s) cps.push_back({cp[2 * s], cp[2 * s + 1]});
    ann.change_points = std::move(cps);
  }
  return make_record(std::move(seq), std::move(ann));
}

template <typename T>
void write_array(H5::Group& g, const char* name, const T* data, std::vector<hsize_t> dims, const H5::PredType& file_type,
                 const H5::PredType& mem_type) {
  H5::DataSpace space = dims.empty() ? H5::DataSpace(H5S_SCALAR)
                                     : H5::DataSpace(static_cast<int>(dims.size()), dims.data());
  auto ds = g.createDataSet(name, file_type, space);
  ds.write(data, mem_type);
}

}  // namespace

Dataset::Map read_hdf5(const fs::path& file) {
  H5::Exception::dontPrint();
  Dataset::Map out;
  try {
    H5::H5File f(file.string(), H5F_ACC_RDONLY);
    const auto n = f.getNumObjs();
    for (hsize_t i = 0; i < n; ++i) {
      const auto name = f.getObjnameByIdx(i);
      if (f.childObjType(name) != H5O_TYPE_GROUP) continue;
      out.emplace(name, read_group(f.openGroup(name), name));
    }
  } catch (const H5::Exception& ex) {
    throw LoadError(file.string() + ": " + ex.getDetailMsg());
  }
  if (out.empty()) throw LoadError("no video groups found in " + file.string());
  return out;
}

void write_hdf5(const Dataset& dataset, const fs::path& file) {
  H5::Exception::dontPrint();
  try {
    H5::H5File f(file.string(), H5F_ACC_TRUNC);
    for (const auto& [id, rec] : dataset.videos()) {
      const auto& seq = rec.sequence;
      const auto& ann = rec.annotations;
      auto g = f.createGroup(id);
      const auto n = static_cast<hsize_t>(seq.length());
      const auto d = static_cast<hsize_t>(seq.dim());

      std::vector<float> feats(static_cast<std::size_t>(n * d));
      for (std::size_t i = 0; i < feats.size(); ++i) feats[i] = static_cast<float>(seq.features.data()[i]);
      write_array(g, "features", feats.data(), {n, d}, H5::PredType::IEEE_F32LE, H5::PredType::NATIVE_FLOAT);

      std::vector<float> gt(ann.gt_score.begin(), ann.gt_score.end());
      write_array(g, "gtscore", gt.data(), {n}, H5::PredType::IEEE_F32LE, H5::PredType::NATIVE_FLOAT);
      write_array(g, "picks", seq.picks.data(), {n}, H5::PredType::STD_I64LE, H5::PredType::NATIVE_INT64);
      write_array(g, "n_frames", &seq.n_frames, {}, H5::PredType::STD_I64LE, H5::PredType::NATIVE_INT64);

      if (ann.user_scores) {
        const auto& m = *ann.user_scores;
        std::vector<float> buf;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          for (Eigen::Index c = 0; c < m.cols(); ++c) buf.push_back(static_cast<float>(m(r, c)));
        write_array(g, "user_scores", buf.data(), {static_cast<hsize_t>(m.rows()), static_cast<hsize_t>(m.cols())},
                    H5::PredType::IEEE_F32LE, H5::PredType::NATIVE_FLOAT);
      }
      if (ann.user_summaries) {
        const auto& m = *ann.user_summaries;
        write_array(g, "user_summary", m.data(), {static_cast<hsize_t>(m.rows()), static_cast<hsize_t>(m.cols())},
                    H5::PredType::STD_U8LE, H5::PredType::NATIVE_UINT8);
      }
      if (ann.change_points) {
        std::vector<std::int64_t> buf;
        for (const auto& cp : *ann.change_points) {
          buf.push_back(cp.start);
          buf.push_back(cp.end);
        }
        write_array(g, "change_points", buf.data(), {static_cast<hsize_t>(ann.change_points->size()), 2},
                    H5::PredType::STD_I64LE, H5::PredType::NATIVE_INT64);
      }
    }
  } catch (const H5::Exception& ex) {
    throw DataError(file.string() + ": " + ex.getDetailMsg());
  }
}

#else

bool hdf5_available() noexcept { return false; }

Dataset::Map read_hdf5(const fs::path& file) {
  throw LoadError("cannot read " + file.string() + ": built without HDF5 support (use a json-dir dataset)");
}

void write_hdf5(const Dataset&, const fs::path& file) {
  throw DataError("cannot write " + file.string() + ": built without HDF5 support");
}

#endif

}  // namespace vsum
