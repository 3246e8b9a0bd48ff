#include "markovnet/nn/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "markovnet/errors.hpp"

namespace markovnet::nn {

namespace {

Matrix sigmoid(const Matrix& x) {
    return ((-x.array()).exp() + 1.0).inverse().matrix();
}

void glorot_fill(Matrix& m, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    double* data = m.data();
    for (Eigen::Index k = 0; k < m.size(); ++k) data[k] = rng.uniform(-limit, limit);
}

template <typename Fn>
void for_each_param(Model& model, Fn&& fn) {
    if (model.shape.cell == Cell::Gru) {
        auto& g = model.gru;
        for (Matrix* m : {&g.Wz, &g.Wr, &g.Wh, &g.Uz, &g.Ur, &g.Uh}) fn(m->data(), m->size());
        for (Vector* v : {&g.bz, &g.br, &g.bh}) fn(v->data(), v->size());
    } else {
        auto& l = model.lstm;
        for (Matrix* m : {&l.Wf, &l.Wi, &l.Wo, &l.Wc}) fn(m->data(), m->size());
        for (Vector* v : {&l.bf, &l.bi, &l.bo, &l.bc}) fn(v->data(), v->size());
    }
    for (auto& layer : model.dense) {
        fn(layer.W.data(), layer.W.size());
        fn(layer.b.data(), layer.b.size());
    }
}

template <typename Fn>
void for_each_param(const Model& model, Fn&& fn) {
    for_each_param(const_cast<Model&>(model),
                   [&fn](double* data, Eigen::Index n) { fn(static_cast<const double*>(data), n); });
}

Matrix apply_activation(Activation act, const Matrix& pre) {
    switch (act) {
        case Activation::ReLU: return pre.cwiseMax(0.0);
        case Activation::Identity: return pre;
        case Activation::Softmax: {
            Matrix shifted = pre.rowwise() - pre.colwise().maxCoeff();
            Matrix e = shifted.array().exp().matrix();
            Eigen::RowVectorXd sums = e.colwise().sum();
            return e.array().rowwise() / sums.array();
        }
    }
    throw ShapeError("unknown activation");
}

}  // namespace

std::string to_string(Cell cell) { return cell == Cell::Gru ? "gru" : "lstm"; }

std::string to_string(Activation act) {
    switch (act) {
        case Activation::ReLU: return "relu";
        case Activation::Softmax: return "softmax";
        case Activation::Identity: return "identity";
    }
    return "?";
}

ModelShape classifier_shape(Cell cell, int input) {
    ModelShape shape;
    shape.cell = cell;
    shape.input = input;
    shape.hidden = 32;
    shape.dense = {{16, Activation::ReLU}, {3, Activation::Softmax}};
    return shape;
}

ModelShape forecaster_shape(Cell cell, int input, int output) {
    ModelShape shape;
    shape.cell = cell;
    shape.input = input;
    shape.hidden = 64;
    shape.dense = {{64, Activation::ReLU}, {output, Activation::Identity}};
    return shape;
}

std::size_t param_count(const ModelShape& shape) {
    const std::size_t in = static_cast<std::size_t>(shape.input);
    const std::size_t hid = static_cast<std::size_t>(shape.hidden);
    std::size_t n = 0;
    if (shape.cell == Cell::Gru) n = 3 * (hid * in + hid * hid + hid);
    else n = 4 * (hid * (hid + in) + hid);
    std::size_t prev = hid;
    for (const auto& [width, act] : shape.dense) {
        n += static_cast<std::size_t>(width) * prev + static_cast<std::size_t>(width);
        prev = static_cast<std::size_t>(width);
    }
    return n;
}

Model zeros_like(const ModelShape& shape) {
    Model m;
    m.shape = shape;
    const int in = shape.input, hid = shape.hidden;
    if (shape.cell == Cell::Gru) {
        for (Matrix* w : {&m.gru.Wz, &m.gru.Wr, &m.gru.Wh}) *w = Matrix::Zero(hid, in);
        for (Matrix* u : {&m.gru.Uz, &m.gru.Ur, &m.gru.Uh}) *u = Matrix::Zero(hid, hid);
        for (Vector* b : {&m.gru.bz, &m.gru.br, &m.gru.bh}) *b = Vector::Zero(hid);
    } else {
        for (Matrix* w : {&m.lstm.Wf, &m.lstm.Wi, &m.lstm.Wo, &m.lstm.Wc}) {
            *w = Matrix::Zero(hid, hid + in);
        }
        for (Vector* b : {&m.lstm.bf, &m.lstm.bi, &m.lstm.bo, &m.lstm.bc}) *b = Vector::Zero(hid);
    }
    int prev = hid;
    for (const auto& [width, act] : shape.dense) {
        DenseParams layer;
        layer.W = Matrix::Zero(width, prev);
        layer.b = Vector::Zero(width);
        layer.act = act;
        m.dense.push_back(std::move(layer));
        prev = width;
    }
    return m;
}

Model init_params(const ModelShape& shape, Rng& rng) {
    Model m = zeros_like(shape);
    const int in = shape.input, hid = shape.hidden;
    if (shape.cell == Cell::Gru) {
        for (Matrix* w : {&m.gru.Wz, &m.gru.Wr, &m.gru.Wh}) glorot_fill(*w, in, hid, rng);
        for (Matrix* u : {&m.gru.Uz, &m.gru.Ur, &m.gru.Uh}) glorot_fill(*u, hid, hid, rng);
    } else {
        for (Matrix* w : {&m.lstm.Wf, &m.lstm.Wi, &m.lstm.Wo, &m.lstm.Wc}) {
            glorot_fill(*w, hid + in, hid, rng);
        }
    }
    int prev = hid;
    for (auto& layer : m.dense) {
        glorot_fill(layer.W, prev, static_cast<int>(layer.W.rows()), rng);
        prev = static_cast<int>(layer.W.rows());
    }
    return m;
}

Vector flatten(const Model& model) {
    Vector flat(param_count(model.shape));
    Eigen::Index at = 0;
    for_each_param(model, [&](const double* data, Eigen::Index n) {
        std::copy(data, data + n, flat.data() + at);
        at += n;
    });
    return flat;
}

void unflatten(const Vector& flat, Model& model) {
    if (flat.size() != static_cast<Eigen::Index>(param_count(model.shape))) {
        throw ShapeError("flat parameter vector has wrong length");
    }
    Eigen::Index at = 0;
    for_each_param(model, [&](double* data, Eigen::Index n) {
        std::copy(flat.data() + at, flat.data() + at + n, data);
        at += n;
    });
}

Matrix forward_model(const Model& model, const std::vector<Matrix>& xs, ForwardCache& cache) {
    if (xs.empty()) throw ShapeError("empty input sequence");
    const int hid = model.shape.hidden;
    const auto batch = xs.front().cols();
    for (const auto& x : xs) {
        if (x.rows() != model.shape.input || x.cols() != batch) {
            throw ShapeError("input step has wrong dimensions");
        }
    }
    const std::size_t steps = xs.size();

    cache.h.assign(steps + 1, Matrix());
    cache.h[0] = Matrix::Zero(hid, batch);

    if (model.shape.cell == Cell::Gru) {
        cache.z.assign(steps, Matrix());
        cache.r.assign(steps, Matrix());
        cache.g.assign(steps, Matrix());
        const auto& p = model.gru;
        for (std::size_t t = 0; t < steps; ++t) {
            const Matrix& hp = cache.h[t];
            Matrix z = sigmoid(((p.Wz * xs[t] + p.Uz * hp).colwise() + p.bz));
            Matrix r = sigmoid(((p.Wr * xs[t] + p.Ur * hp).colwise() + p.br));
            Matrix g = ((p.Wh * xs[t] + p.Uh * (r.cwiseProduct(hp))).colwise() + p.bh)
                           .array()
                           .tanh()
                           .matrix();
            cache.h[t + 1] = (1.0 - z.array()).matrix().cwiseProduct(hp) + z.cwiseProduct(g);
            cache.z[t] = std::move(z);
            cache.r[t] = std::move(r);
            cache.g[t] = std::move(g);
        }
    } else {
        cache.f.assign(steps, Matrix());
        cache.i.assign(steps, Matrix());
        cache.o.assign(steps, Matrix());
        cache.cbar.assign(steps, Matrix());
        cache.c.assign(steps + 1, Matrix());
        cache.tanh_c.assign(steps, Matrix());
        cache.c[0] = Matrix::Zero(hid, batch);
        const auto& p = model.lstm;
        Matrix hx(hid + model.shape.input, batch);
        for (std::size_t t = 0; t < steps; ++t) {
            hx.topRows(hid) = cache.h[t];
            hx.bottomRows(model.shape.input) = xs[t];
            Matrix f = sigmoid((p.Wf * hx).colwise() + p.bf);
            Matrix i = sigmoid((p.Wi * hx).colwise() + p.bi);
            Matrix o = sigmoid((p.Wo * hx).colwise() + p.bo);
            Matrix cbar = ((p.Wc * hx).colwise() + p.bc).array().tanh().matrix();
            cache.c[t + 1] = f.cwiseProduct(cache.c[t]) + i.cwiseProduct(cbar);
            cache.tanh_c[t] = cache.c[t + 1].array().tanh().matrix();
            cache.h[t + 1] = o.cwiseProduct(cache.tanh_c[t]);
            cache.f[t] = std::move(f);
            cache.i[t] = std::move(i);
            cache.o[t] = std::move(o);
            cache.cbar[t] = std::move(cbar);
        }
    }

    cache.dense_in.clear();
    cache.dense_pre.clear();
    Matrix act = cache.h[steps];
    for (const auto& layer : model.dense) {
        if (layer.W.cols() != act.rows()) throw ShapeError("dense layer width mismatch");
        cache.dense_in.push_back(act);
        Matrix pre = (layer.W * act).colwise() + layer.b;
        act = apply_activation(layer.act, pre);
        cache.dense_pre.push_back(std::move(pre));
    }
    cache.out = act;
    return act;
}

void backward_model(const Model& model, const std::vector<Matrix>& xs, const ForwardCache& cache,
                    const Matrix& d_top, Gradients& grads) {
    const std::size_t steps = xs.size();

    // Dense stack, last to first. d_pre at the last layer is d_top.
    Matrix d_pre = d_top;
    for (std::size_t l = model.dense.size(); l-- > 0;) {
        const auto& layer = model.dense[l];
        if (l + 1 < model.dense.size()) {
            // d_pre currently holds dL/d(activation) of layer l; fold in the
            // activation derivative.
            switch (layer.act) {
                case Activation::ReLU:
                    d_pre = d_pre.cwiseProduct(
                        (cache.dense_pre[l].array() > 0.0).cast<double>().matrix());
                    break;
                case Activation::Identity: break;
                case Activation::Softmax:
                    throw ShapeError("softmax is only supported as the output layer");
            }
        }
        grads.dense[l].W += d_pre * cache.dense_in[l].transpose();
        grads.dense[l].b += d_pre.rowwise().sum();
        d_pre = (model.dense[l].W.transpose() * d_pre).eval();
    }

    Matrix dh = d_pre;  // gradient w.r.t. the final hidden state
    if (model.shape.cell == Cell::Gru) {
        const auto& p = model.gru;
        auto& g = grads.gru;
        for (std::size_t t = steps; t-- > 0;) {
            const Matrix& hp = cache.h[t];
            const Matrix& z = cache.z[t];
            const Matrix& r = cache.r[t];
            const Matrix& gt = cache.g[t];

            Matrix dz = dh.cwiseProduct(gt - hp).cwiseProduct(z).cwiseProduct(
                (1.0 - z.array()).matrix());
            Matrix dg = dh.cwiseProduct(z).cwiseProduct((1.0 - gt.array().square()).matrix());
            Matrix dhp = dh.cwiseProduct((1.0 - z.array()).matrix());

            g.Wh += dg * xs[t].transpose();
            g.Uh += dg * (r.cwiseProduct(hp)).transpose();
            g.bh += dg.rowwise().sum();
            Matrix k = p.Uh.transpose() * dg;
            Matrix dr = k.cwiseProduct(hp).cwiseProduct(r).cwiseProduct((1.0 - r.array()).matrix());
            dhp += k.cwiseProduct(r);

            g.Wz += dz * xs[t].transpose();
            g.Uz += dz * hp.transpose();
            g.bz += dz.rowwise().sum();
            dhp += p.Uz.transpose() * dz;

            g.Wr += dr * xs[t].transpose();
            g.Ur += dr * hp.transpose();
            g.br += dr.rowwise().sum();
            dhp += p.Ur.transpose() * dr;

            dh = std::move(dhp);
        }
    } else {
        const auto& p = model.lstm;
        auto& g = grads.lstm;
        const int hid = model.shape.hidden;
        Matrix dc = Matrix::Zero(dh.rows(), dh.cols());
        Matrix hx(hid + model.shape.input, dh.cols());
        for (std::size_t t = steps; t-- > 0;) {
            const Matrix& f = cache.f[t];
            const Matrix& i = cache.i[t];
            const Matrix& o = cache.o[t];
            const Matrix& cbar = cache.cbar[t];
            const Matrix& tc = cache.tanh_c[t];

            Matrix d_o = dh.cwiseProduct(tc);
            dc += dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix());
            Matrix d_f = dc.cwiseProduct(cache.c[t]);
            Matrix d_i = dc.cwiseProduct(cbar);
            Matrix d_cbar = dc.cwiseProduct(i);
            Matrix dc_prev = dc.cwiseProduct(f);

            Matrix da_f = d_f.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
            Matrix da_i = d_i.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
            Matrix da_o = d_o.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());
            Matrix da_c = d_cbar.cwiseProduct((1.0 - cbar.array().square()).matrix());

            hx.topRows(hid) = cache.h[t];
            hx.bottomRows(model.shape.input) = xs[t];
            g.Wf += da_f * hx.transpose();
            g.Wi += da_i * hx.transpose();
            g.Wo += da_o * hx.transpose();
            g.Wc += da_c * hx.transpose();
            g.bf += da_f.rowwise().sum();
            g.bi += da_i.rowwise().sum();
            g.bo += da_o.rowwise().sum();
            g.bc += da_c.rowwise().sum();

            Matrix dhx = p.Wf.transpose() * da_f + p.Wi.transpose() * da_i +
                         p.Wo.transpose() * da_o + p.Wc.transpose() * da_c;
            dh = dhx.topRows(hid);
            dc = std::move(dc_prev);
        }
    }
}

std::string shape_descriptor(const ModelShape& shape) {
    std::ostringstream out;
    out << to_string(shape.cell) << " " << shape.input << " " << shape.hidden;
    for (const auto& [width, act] : shape.dense) out << " dense " << width << " " << to_string(act);
    return out.str();
}

ModelShape shape_from_descriptor(const std::string& descriptor) {
    std::istringstream in(descriptor);
    std::string cell;
    ModelShape shape;
    if (!(in >> cell >> shape.input >> shape.hidden)) {
        throw ParseError("malformed model descriptor", 2);
    }
    if (cell == "gru") shape.cell = Cell::Gru;
    else if (cell == "lstm") shape.cell = Cell::Lstm;
    else throw ParseError("unknown cell kind '" + cell + "'", 2);
    shape.dense.clear();
    std::string token;
    while (in >> token) {
        if (token != "dense") throw ParseError("expected 'dense' in model descriptor", 2);
        int width = 0;
        std::string act;
        if (!(in >> width >> act)) throw ParseError("malformed dense layer in descriptor", 2);
        Activation a;
        if (act == "relu") a = Activation::ReLU;
        else if (act == "softmax") a = Activation::Softmax;
        else if (act == "identity") a = Activation::Identity;
        else throw ParseError("unknown activation '" + act + "'", 2);
        shape.dense.emplace_back(width, a);
    }
    return shape;
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "markovnet-model v1\n" << shape_descriptor(model.shape) << "\n";
    const Vector flat = flatten(model);
    char buf[32];
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", flat(i));
        out << buf << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty model file", 1);
    if (line != "markovnet-model v1") {
        if (line.rfind("markovnet-model", 0) == 0) throw VersionError("unsupported model version: " + line);
        throw ParseError("missing model header", 1);
    }
    if (!std::getline(in, line)) throw ParseError("missing model descriptor", 2);
    Model model = zeros_like(shape_from_descriptor(line));
    const std::size_t n = param_count(model.shape);
    Vector flat(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ParseError("model file truncated", i + 3);
        char* end = nullptr;
        flat(static_cast<Eigen::Index>(i)) = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) throw ParseError("malformed parameter", i + 3);
    }
    unflatten(flat, model);
    return model;
}

}  // namespace markovnet::nn
