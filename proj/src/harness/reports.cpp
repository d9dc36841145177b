#include <sstream>

#include "lasco/harness/harness.hpp"
#include "lasco/io/file_io.hpp"

namespace lasco::harness {

namespace {
std::string fd(double x) { return io::format_double(x); }
}  // namespace

std::string adapt_report_csv(const AdaptReport& r) {
  std::ostringstream os;
  os << "env_id,mode,codeword_len,seed,n_train,alpha_init,alpha_final,"
        "epochs_to_converge,stop_epoch,censored,test_nmse,test_nmse_db,"
        "test_gcs,frozen_ok\n";
  os << r.env_id << ',' << r.mode << ',' << r.codeword_len << ',' << r.seed
     << ',' << r.n_train << ',' << fd(r.alpha_init) << ',' << fd(r.alpha_final)
     << ',' << r.epochs_to_converge << ',' << r.stop_epoch << ','
     << (r.censored ? 1 : 0) << ',' << fd(r.test_nmse) << ','
     << fd(r.test_nmse_db) << ',' << fd(r.test_gcs) << ','
     << (r.frozen_ok ? 1 : 0) << '\n';
  return os.str();
}

std::string trace_csv(const AdaptReport& r) {
  std::ostringstream os;
  os << "epoch,val_nmse\n";
  for (size_t i = 0; i < r.val_trace.size(); ++i)
    os << (i + 1) << ',' << fd(r.val_trace[i]) << '\n';
  return os.str();
}

std::string eval_report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "mode,codeword_len,env_id,nmse,nmse_db,gcs\n";
  for (const auto& row : r.rows)
    os << r.mode << ',' << r.codeword_len << ',' << row.env_id << ','
       << fd(row.nmse) << ',' << fd(row.nmse_db) << ',' << fd(row.gcs) << '\n';
  os << r.mode << ',' << r.codeword_len << ",mean," << fd(r.mean_nmse) << ','
     << fd(r.mean_nmse_db) << ',' << fd(r.mean_gcs) << '\n';
  return os.str();
}

}  // namespace lasco::harness
