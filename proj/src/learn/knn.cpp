#include <json.hpp>

#include <algorithm>
#include <numeric>

#include "models.hpp"

namespace attackmap::learn::detail {

namespace {

class KnnModel final : public ClassifierModel {
public:
    KnnModel(FeatureMatrix train, EncodedLabels labels, std::size_t k)
        : ClassifierModel(labels.classes, train.cols()),
          train_(std::move(train)),
          target_(std::move(labels.index)),
          k_(std::min(k, train_.rows())) {}

    Algorithm algorithm() const override { return Algorithm::knn; }

    std::string dump_json() const override {
        nlohmann::json j;
        j["algorithm"] = "knn";
        j["k"] = k_;
        j["train_rows"] = train_.rows();
        j["classes"] = class_labels();
        return j.dump();
    }

protected:
    DenseMatrix scores_impl(const FeatureMatrix& x) const override {
        const std::size_t n_classes = class_labels().size();
        DenseMatrix out(x.rows(), n_classes);
        std::vector<std::pair<double, std::size_t>> distances(train_.rows());
        for (std::size_t q = 0; q < x.rows(); ++q) {
            for (std::size_t t = 0; t < train_.rows(); ++t) {
                distances[t] = {row_squared_distance(x, q, train_, t), t};
            }
            // Equal distances resolve to the lower training index.
            std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(k_), distances.end());
            for (std::size_t n = 0; n < k_; ++n) out(q, static_cast<std::size_t>(target_[distances[n].second])) += 1.0;
            for (auto& v : out.row(q)) v /= static_cast<double>(k_);
        }
        return out;
    }

private:
    FeatureMatrix train_;
    std::vector<int> target_;
    std::size_t k_;
};

}  // namespace

std::unique_ptr<ClassifierModel> fit_knn(const FeatureMatrix& x, EncodedLabels labels, const KnnParams& params) {
    if (params.k == 0) throw InvalidArgument("knn: k must be positive");
    return std::make_unique<KnnModel>(x, std::move(labels), params.k);
}

}  // namespace attackmap::learn::detail
