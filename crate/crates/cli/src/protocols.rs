//! Small hand-written protocols in the shape of classic session-type
//! benchmarks. Each is a choreography; the benchmark input is its
//! projection.

/// Name and choreography text.
pub const PROTOCOLS: &[(&str, &str)] = &[
    ("ring", "def X { p.*->q; r.*->s; X } main { X }"),
    (
        "bargain",
        "def X { b.offer->s; if s.accept then { s->b[ok]; b.pay->s; stop } else { s->b[ko]; s.counter->b; X } } \
         main { b.hello->s; X }",
    ),
    (
        "cloud-system",
        "def X { c.req->s; s.query->d; d.rows->s; if s.more then { s->c[more]; s->d[more]; s.part->c; X } \
         else { s->c[done]; s->d[done]; s.last->c; stop } } main { c.login->s; s.token->c; X }",
    ),
    ("filter-collaboration", "def X { d.data->f; f.filtered->g; g.ack->d; X } main { X }"),
    (
        "health-system",
        "def X { p.symptoms->h; h.sample->l; l.result->h; if h.healthy then { h->p[out]; h->l[out]; h.bill->p; stop } \
         else { h->p[treat]; h->l[again]; h.therapy->p; X } } main { p.register->h; X }",
    ),
    ("logistic", "def X { r.order->s; s.pick->w; w.ship->t; t.deliver->r; X } main { X }"),
    (
        "running-example",
        "def X { b.title->s; s.quote->b; if b.ok then { b->s[buy]; b->k[pay]; b.amount->k; k.receipt->s; X } \
         else { b->s[quit]; b->k[quit]; stop } } main { X }",
    ),
    ("sanitary-agency", "def X { c.request->a; a.assign->o; o.done->a; a.pay->o; a.notify->c; X } main { X }"),
];
