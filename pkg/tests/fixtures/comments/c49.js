var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;

var url = 'http://example.com/a//b'; // trailing note
var url = 'http://example.com/a//b'; // trailing note

var d = x++ / 2; /* after postfix */
